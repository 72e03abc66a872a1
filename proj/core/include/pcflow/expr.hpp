#pragma once

#include <memory>
#include <string>
#include <vector>

namespace pcflow {

// Compiled closed-form profile in the variables x and y. Grammar: numbers,
// x, y, pi, + - * / ^, parentheses, unary minus, and the functions sin,
// cos, exp. Parsing throws std::invalid_argument with a position marker.
struct Expr {
  struct Node;
  std::shared_ptr<const Node> root;
};

Expr parse_expr(const std::string& src);

double eval(const Expr& e, double x, double y);

// Sample a profile along one coordinate line: var is 'x' or 'y', the other
// variable is held at zero.
std::vector<double> eval_line(const Expr& e, char var,
                              const std::vector<double>& pts);

}  // namespace pcflow
