#pragma once

// Concrete text syntax for BUTF.
//
//   expr    ::= '\' ident '.' expr
//             | 'if' expr 'then' expr 'else' expr
//             | sum
//   sum     ::= product (('+' | '-') product)*
//   product ::= apply (('*' | '/') apply)*
//   apply   ::= postfix postfix*                  -- left associative
//   postfix ::= atom ('[' expr ']')*               -- no space before '['
//   atom    ::= integer | '-' integer | ident | 'map' | 'iota' | 'size'
//             | '(+)' | '(-)' | '(*)' | '(/)'
//             | '(' ')' | '(' expr ',' ')' | '(' expr (',' expr)+ ')'
//             | '(' expr ')' | '[' (expr (',' expr)*)? ']'
//
// `a[i]` indexes while `f [i]` applies f to an array literal.
// `a + b` is sugar for `(+) (a, b)`. `--` starts a line comment.

#include "bpi/butf/expr.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bpi::butf {

class ParseError : public std::runtime_error {
   public:
    ParseError(std::size_t line, std::size_t column, const std::string& what);
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

   private:
    std::size_t line_;
    std::size_t column_;
};

Expr parse(std::string_view text);

/// Prints `e` so that `parse(pretty(e)) == e` holds structurally.
std::string pretty(const Expr& e);

}  // namespace bpi::butf
