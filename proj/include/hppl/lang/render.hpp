#pragma once

#include <string>

#include "hppl/lang/ast.hpp"

namespace hppl {

/// Pretty-prints a program in concrete syntax. `parse(render(p)) == p` for
/// every program with finite literals.
std::string render(const Program& p);

std::string render_expr(const NumExpr& e);
std::string render_dist(const DistExpr& d);
std::string render_datum(const Datum& d);
std::string render_int(const IntExpr& e);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

}  // namespace hppl
