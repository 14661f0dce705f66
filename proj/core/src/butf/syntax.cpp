#include "bpi/butf/syntax.hpp"

#include <cctype>
#include <optional>
#include <sstream>
#include <vector>

namespace bpi::butf {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

enum class Tok { Int, Ident, Sym, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::size_t line = 1;
    std::size_t column = 1;
    bool space_before = false;
};

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    std::size_t line = 1, col = 1, i = 0;
    bool space = true;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            space = true;
            continue;
        }
        if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
            while (i < src.size() && src[i] != '\n') advance(1);
            space = true;
            continue;
        }
        Token t;
        t.line = line;
        t.column = col;
        t.space_before = space;
        space = false;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            t.kind = Tok::Int;
            t.text = std::string(src.substr(i, j - i));
            advance(j - i);
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            t.kind = Tok::Ident;
            t.text = std::string(src.substr(i, j - i));
            advance(j - i);
        } else if (std::string_view("\\.()[],+-*/").find(c) != std::string_view::npos) {
            t.kind = Tok::Sym;
            t.text = std::string(1, c);
            advance(1);
        } else {
            throw ParseError(line, col, std::string("unexpected character '") + c + "'");
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.line = line;
    end.column = col;
    out.push_back(end);
    return out;
}

class Parser {
   public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    Expr program() {
        Expr e = expr();
        if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "' after expression");
        return e;
    }

   private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;

    const Token& peek(std::size_t ahead = 0) const {
        const std::size_t k = pos_ + ahead;
        return k < toks_.size() ? toks_[k] : toks_.back();
    }
    Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool at_sym(std::string_view s, std::size_t ahead = 0) const {
        return peek(ahead).kind == Tok::Sym && peek(ahead).text == s;
    }
    bool at_word(std::string_view s) const { return peek().kind == Tok::Ident && peek().text == s; }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(peek().line, peek().column, msg); }

    void expect_sym(std::string_view s) {
        if (!at_sym(s)) fail("expected '" + std::string(s) + "'");
        next();
    }
    void expect_word(std::string_view s) {
        if (!at_word(s)) fail("expected '" + std::string(s) + "'");
        next();
    }

    Expr expr() {
        if (at_sym("\\")) {
            next();
            if (peek().kind != Tok::Ident || is_keyword(peek().text)) fail("expected parameter name after '\\'");
            std::string param = next().text;
            expect_sym(".");
            return lambda(std::move(param), expr());
        }
        if (at_word("if")) {
            next();
            Expr c = expr();
            expect_word("then");
            Expr t = expr();
            expect_word("else");
            Expr e = expr();
            return if_(std::move(c), std::move(t), std::move(e));
        }
        return sum();
    }

    Expr sum() {
        Expr lhs = product();
        while (at_sym("+") || at_sym("-")) {
            const ArithOp op = next().text == "+" ? ArithOp::Add : ArithOp::Sub;
            lhs = binop(op, std::move(lhs), product());
        }
        return lhs;
    }

    Expr product() {
        Expr lhs = apply();
        while (at_sym("*") || at_sym("/")) {
            const ArithOp op = next().text == "*" ? ArithOp::Mul : ArithOp::Div;
            lhs = binop(op, std::move(lhs), apply());
        }
        return lhs;
    }

    bool starts_atom() const {
        const Token& t = peek();
        if (t.kind == Tok::Int) return true;
        if (t.kind == Tok::Ident) return t.text != "if" && t.text != "then" && t.text != "else";
        return at_sym("(") || at_sym("[");
    }

    Expr apply() {
        if (!starts_atom() && !(at_sym("-") && peek(1).kind == Tok::Int && !peek(1).space_before))
            fail(peek().kind == Tok::End ? "unexpected end of input" : "unexpected '" + peek().text + "'");
        Expr f = postfix();
        while (starts_atom()) f = app(std::move(f), postfix());
        return f;
    }

    Expr postfix() {
        Expr e = atom();
        while (at_sym("[") && !peek().space_before) {
            next();
            Expr i = expr();
            expect_sym("]");
            e = index(std::move(e), std::move(i));
        }
        return e;
    }

    std::optional<ArithOp> op_of(const Token& t) const {
        if (t.kind != Tok::Sym) return std::nullopt;
        if (t.text == "+") return ArithOp::Add;
        if (t.text == "-") return ArithOp::Sub;
        if (t.text == "*") return ArithOp::Mul;
        if (t.text == "/") return ArithOp::Div;
        return std::nullopt;
    }

    Expr atom() {
        const Token& t = peek();
        if (t.kind == Tok::Int) return num(Integer(next().text));
        if (at_sym("-") && peek(1).kind == Tok::Int && !peek(1).space_before) {
            next();
            return num(-Integer(next().text));
        }
        if (t.kind == Tok::Ident) {
            if (t.text == "map") return next(), builtin(BuiltinKind::Map);
            if (t.text == "iota") return next(), builtin(BuiltinKind::Iota);
            if (t.text == "size") return next(), builtin(BuiltinKind::Size);
            if (is_keyword(t.text)) fail("unexpected keyword '" + t.text + "'");
            return var(next().text);
        }
        if (at_sym("[")) {
            next();
            std::vector<Expr> els;
            if (!at_sym("]")) {
                els.push_back(expr());
                while (at_sym(",")) {
                    next();
                    els.push_back(expr());
                }
            }
            expect_sym("]");
            return array(std::move(els));
        }
        if (at_sym("(")) {
            next();
            if (at_sym(")")) {
                next();
                return tuple({});
            }
            if (auto op = op_of(peek()); op && at_sym(")", 1)) {
                next();
                next();
                return arith(*op);
            }
            Expr first = expr();
            if (at_sym(")")) {
                next();
                return first;
            }
            std::vector<Expr> els{std::move(first)};
            expect_sym(",");
            while (!at_sym(")")) {
                els.push_back(expr());
                if (!at_sym(",")) break;
                next();
                if (els.size() >= 2 && at_sym(")")) fail("trailing ',' only allowed in a unary tuple");
            }
            expect_sym(")");
            return tuple(std::move(els));
        }
        if (t.kind == Tok::End) fail("unexpected end of input");
        fail("unexpected '" + t.text + "'");
    }
};

enum Prec { Top = 0, Sum = 1, Product = 2, Apply = 3, Postfix = 4 };

class Printer {
   public:
    std::string run(const Expr& e) {
        print(e, Top);
        return out_.str();
    }

   private:
    std::ostringstream out_;

    static std::optional<std::pair<ArithOp, const Tuple*>> infix(const App& a) {
        const auto* b = a.fun.as<Builtin>();
        const auto* t = a.arg.as<Tuple>();
        if (b && b->kind == BuiltinKind::Arith && t && t->elements.size() == 2) return std::pair{b->op, t};
        return std::nullopt;
    }

    void list(const std::vector<Expr>& xs) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i) out_ << ", ";
            print(xs[i], Top);
        }
    }

    void print(const Expr& e, int ctx) {
        int mine = Postfix;
        if (e.is<Lambda>() || e.is<If>()) mine = Top;
        if (const auto* n = e.as<Num>(); n && n->value < 0 && ctx != Top) mine = -1;
        if (const auto* a = e.as<App>()) {
            if (auto in = infix(*a))
                mine = (in->first == ArithOp::Add || in->first == ArithOp::Sub) ? Sum : Product;
            else
                mine = Apply;
        }
        const bool paren = mine < ctx;
        if (paren) out_ << '(';
        body(e, mine < 0 ? Top : mine);
        if (paren) out_ << ')';
    }

    void body(const Expr& e, int mine) {
        if (const auto* n = e.as<Num>()) {
            out_ << n->value;
        } else if (const auto* v = e.as<Var>()) {
            out_ << v->name;
        } else if (const auto* b = e.as<Builtin>()) {
            out_ << builtin_name(*b);
        } else if (const auto* l = e.as<Lambda>()) {
            out_ << '\\' << l->param << ". ";
            print(l->body, Top);
        } else if (const auto* c = e.as<If>()) {
            out_ << "if ";
            print(c->cond, Top);
            out_ << " then ";
            print(c->then_branch, Top);
            out_ << " else ";
            print(c->else_branch, Top);
        } else if (const auto* arr = e.as<Array>()) {
            out_ << '[';
            list(arr->elements);
            out_ << ']';
        } else if (const auto* t = e.as<Tuple>()) {
            out_ << '(';
            list(t->elements);
            if (t->elements.size() == 1) out_ << ',';
            out_ << ')';
        } else if (const auto* ix = e.as<Index>()) {
            print(ix->target, Postfix);
            out_ << '[';
            print(ix->index, Top);
            out_ << ']';
        } else if (const auto* a = e.as<App>()) {
            if (auto in = infix(*a)) {
                print(in->second->elements[0], mine);
                out_ << ' ' << arith_symbol(in->first) << ' ';
                print(in->second->elements[1], mine + 1);
            } else {
                print(a->fun, Apply);
                out_ << ' ';
                print(a->arg, Postfix);
            }
        }
    }
};

}  // namespace

Expr parse(std::string_view text) { return Parser(lex(text)).program(); }

std::string pretty(const Expr& e) { return Printer{}.run(e); }

}  // namespace bpi::butf
