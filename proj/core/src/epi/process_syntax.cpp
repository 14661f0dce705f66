#include "bpi/epi/process.hpp"

#include <cctype>
#include <sstream>

namespace bpi::epi {

SyntaxError::SyntaxError(std::size_t line, std::size_t column, const std::string& what)
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
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '#' || c == '~' || c == '\'';
}

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    std::size_t line = 1, col = 1, i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        Token t;
        t.line = line;
        t.column = col;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            t.kind = Tok::Int;
            t.text = std::string(src.substr(i, j - i));
        } else if (ident_start(c)) {
            std::size_t j = i;
            while (j < src.size() && ident_char(src[j])) ++j;
            t.kind = Tok::Ident;
            t.text = std::string(src.substr(i, j - i));
        } else {
            static constexpr std::string_view two[] = {":<", "<=", ">=", "!="};
            t.kind = Tok::Sym;
            for (auto s : two)
                if (src.substr(i, 2) == s) t.text = std::string(s);
            if (t.text.empty()) {
                if (std::string_view("|!.,()[]<>*+-/=").find(c) == std::string_view::npos)
                    throw SyntaxError(line, col, std::string("unexpected character '") + c + "'");
                t.text = std::string(1, c);
            }
        }
        advance(t.text.size());
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
    explicit Parser(std::vector<Token> t) : toks_(std::move(t)) {}

    Process program() {
        Process p = proc();
        if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
        return p;
    }

   private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::vector<std::string> scope_;  // bound variables, innermost last

    const Token& peek(std::size_t k = 0) const {
        return pos_ + k < toks_.size() ? toks_[pos_ + k] : toks_.back();
    }
    Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool at(std::string_view s, std::size_t k = 0) const {
        return peek(k).kind == Tok::Sym && peek(k).text == s;
    }
    [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(peek().line, peek().column, msg); }
    void expect(std::string_view s) {
        if (!at(s)) fail("expected '" + std::string(s) + "'");
        next();
    }
    std::string ident() {
        if (peek().kind != Tok::Ident) fail("expected identifier");
        return next().text;
    }
    bool is_var(const std::string& id) const {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
            if (*it == id) return true;
        return false;
    }
    Term ref(const std::string& id) const { return is_var(id) ? tvar(id) : tname(id); }

    Process proc() {
        Process p = prefix();
        while (at("|")) {
            next();
            p = par(std::move(p), prefix());
        }
        return p;
    }

    Process prefix() {
        const Token& t = peek();
        if (t.kind == Tok::Int && t.text == "0") {
            next();
            return nil();
        }
        if (at("!")) {
            next();
            return repl(prefix());
        }
        if (at("*")) {
            next();
            return bullet(prefix());
        }
        if (at("(")) {
            next();
            Process p = proc();
            expect(")");
            return p;
        }
        if (at("[")) return guard();
        if (t.kind == Tok::Ident && t.text == "new") {
            next();
            std::vector<std::string> names{ident()};
            while (at(",")) {
                next();
                names.push_back(ident());
            }
            expect(".");
            return new_all(names, prefix());
        }
        if (t.kind == Tok::Ident) return action();
        fail(t.kind == Tok::End ? "unexpected end of input" : "unexpected '" + t.text + "'");
    }

    Process guard() {
        expect("[");
        Term lhs = term();
        Cmp c;
        if (at("<"))
            c = Cmp::Lt;
        else if (at(">"))
            c = Cmp::Gt;
        else if (at("<="))
            c = Cmp::Le;
        else if (at(">="))
            c = Cmp::Ge;
        else if (at("="))
            c = Cmp::Eq;
        else if (at("!="))
            c = Cmp::Ne;
        else
            fail("expected comparison operator");
        next();
        Term rhs = term();
        expect("]");
        Process then_p = prefix();
        expect(",");
        Process else_p = prefix();
        return match(std::move(lhs), c, std::move(rhs), std::move(then_p), std::move(else_p));
    }

    ChannelId channel() {
        Term base = ref(ident());
        if (!at(".")) return chan(std::move(base));
        const Token& lbl = peek(1);
        const bool neg = at("-", 1) && peek(2).kind == Tok::Int;
        const bool labelled = lbl.kind == Tok::Int || lbl.kind == Tok::Ident || neg;
        const std::size_t after = neg ? 3 : 2;
        if (!labelled || !(at("<", after) || at("(", after) || at(":<", after))) return chan(std::move(base));
        next();
        if (neg) {
            next();
            return chan_index(std::move(base), tnum(-Integer(next().text)));
        }
        Token l = next();
        if (l.kind == Tok::Int) return chan_index(std::move(base), tnum(Integer(l.text)));
        if (l.text == "all") return chan(std::move(base), Label::Kind::All);
        if (l.text == "tup") return chan(std::move(base), Label::Kind::Tup);
        if (l.text == "len") return chan(std::move(base), Label::Kind::Len);
        return chan_index(std::move(base), ref(l.text));
    }

    std::vector<Term> terms(std::string_view close) {
        std::vector<Term> out;
        if (at(close)) {
            next();
            return out;
        }
        out.push_back(term());
        while (at(",")) {
            next();
            out.push_back(term());
        }
        expect(close);
        return out;
    }

    Process action() {
        ChannelId c = channel();
        Action a;
        std::size_t pushed = 0;
        if (at("<")) {
            next();
            a = send(std::move(c), terms(">"));
        } else if (at(":<")) {
            next();
            a = broadcast(std::move(c), terms(">"));
        } else if (at("(")) {
            next();
            std::vector<Pattern> params;
            if (!at(")")) {
                for (;;) {
                    std::string x = ident();
                    params.push_back(x == "_" ? Pattern{} : Pattern{x});
                    if (!at(",")) break;
                    next();
                }
            }
            expect(")");
            for (const auto& p : params)
                if (p) {
                    scope_.push_back(*p);
                    ++pushed;
                }
            a = recv(std::move(c), std::move(params));
        } else {
            fail("expected '<', ':<' or '(' after channel");
        }
        Process cont = nil();
        if (at(".")) {
            next();
            cont = prefix();
        }
        scope_.resize(scope_.size() - pushed);
        return act(std::move(a), std::move(cont));
    }

    Term term() {
        Term lhs = product();
        while (at("+") || at("-")) {
            const ArithOp op = next().text == "+" ? ArithOp::Add : ArithOp::Sub;
            lhs = tbin(op, std::move(lhs), product());
        }
        return lhs;
    }

    Term product() {
        Term lhs = atom();
        while (at("*") || at("/")) {
            const ArithOp op = next().text == "*" ? ArithOp::Mul : ArithOp::Div;
            lhs = tbin(op, std::move(lhs), atom());
        }
        return lhs;
    }

    Term atom() {
        if (peek().kind == Tok::Int) return tnum(Integer(next().text));
        if (at("-") && peek(1).kind == Tok::Int) {
            next();
            return tnum(-Integer(next().text));
        }
        if (peek().kind == Tok::Ident) return ref(next().text);
        if (at("(")) {
            next();
            Term t = term();
            expect(")");
            return t;
        }
        fail("expected term");
    }
};

void print_term(std::ostream& os, const Term& t, int ctx) {
    if (const auto* n = t.as<TNum>()) {
        if (n->value < 0 && ctx > 0)
            os << '(' << n->value << ')';
        else
            os << n->value;
    } else if (const auto* a = t.as<TName>()) {
        os << a->id;
    } else if (const auto* x = t.as<TVar>()) {
        os << x->id;
    } else if (const auto* b = t.as<TBin>()) {
        const int mine = (b->op == ArithOp::Add || b->op == ArithOp::Sub) ? 1 : 2;
        if (mine < ctx) os << '(';
        print_term(os, b->lhs, mine);
        os << ' ' << butf::arith_symbol(b->op) << ' ';
        print_term(os, b->rhs, mine + 1);
        if (mine < ctx) os << ')';
    }
}

void print_channel(std::ostream& os, const ChannelId& c) {
    print_term(os, c.base, 3);
    if (!c.suffix) return;
    os << '.';
    switch (c.suffix->kind) {
        case Label::Kind::All: os << "all"; break;
        case Label::Kind::Tup: os << "tup"; break;
        case Label::Kind::Len: os << "len"; break;
        case Label::Kind::Index:
            if (const auto* n = c.suffix->index.as<TNum>())
                os << n->value;
            else
                print_term(os, c.suffix->index, 3);
            break;
    }
}

void print_action(std::ostream& os, const Action& a) {
    print_channel(os, a.channel);
    auto list = [&](const std::vector<Term>& ts) {
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (i) os << ", ";
            print_term(os, ts[i], 0);
        }
    };
    switch (a.kind) {
        case Action::Kind::Send:
            os << '<';
            list(a.args);
            os << '>';
            break;
        case Action::Kind::Broadcast:
            os << ":<";
            list(a.args);
            os << '>';
            break;
        case Action::Kind::Recv:
            os << '(';
            for (std::size_t i = 0; i < a.params.size(); ++i) {
                if (i) os << ", ";
                os << (a.params[i] ? *a.params[i] : "_");
            }
            os << ')';
            break;
    }
}

// ctx 0: any process; ctx 1: prefix position (a parallel composition needs parens)
void print_proc(std::ostream& os, const Process& p, int ctx) {
    if (p.is<Nil>()) {
        os << '0';
    } else if (const auto* x = p.as<Par>()) {
        if (ctx > 0) os << '(';
        print_proc(os, x->left, 0);
        os << " | ";
        print_proc(os, x->right, 1);
        if (ctx > 0) os << ')';
    } else if (const auto* x = p.as<Repl>()) {
        os << '!';
        print_proc(os, x->body, 1);
    } else if (const auto* x = p.as<Bullet>()) {
        os << '*';
        print_proc(os, x->body, 1);
    } else if (const auto* x = p.as<New>()) {
        os << "new " << x->name;
        Process body = x->body;
        while (const auto* inner = body.as<New>()) {
            os << ", " << inner->name;
            body = inner->body;
        }
        os << ". ";
        print_proc(os, body, 1);
    } else if (const auto* x = p.as<Act>()) {
        print_action(os, x->action);
        if (!x->cont.is<Nil>()) {
            os << '.';
            print_proc(os, x->cont, 1);
        }
    } else if (const auto* x = p.as<Match>()) {
        os << '[';
        print_term(os, x->lhs, 0);
        os << ' ' << cmp_symbol(x->cmp) << ' ';
        print_term(os, x->rhs, 0);
        os << "] ";
        print_proc(os, x->then_p, 1);
        os << ", ";
        print_proc(os, x->else_p, 1);
    }
}

}  // namespace

Process parse_process(std::string_view text) { return Parser(lex(text)).program(); }

std::string pretty(const Process& p) {
    std::ostringstream os;
    print_proc(os, p, 0);
    return os.str();
}

std::string pretty(const Term& t) {
    std::ostringstream os;
    print_term(os, t, 0);
    return os.str();
}

std::string pretty(const ChannelId& c) {
    std::ostringstream os;
    print_channel(os, c);
    return os.str();
}

std::string pretty(const Action& a) {
    std::ostringstream os;
    print_action(os, a);
    return os.str();
}

}  // namespace bpi::epi
