#include "rulejoin/task.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace rulejoin {

ParseError::ParseError(const std::string& msg, int line, int column)
    : std::invalid_argument("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
      line_(line), column_(column) {}

// ---------------------------------------------------------------- printing

namespace {

bool plain_name(std::string_view s) {
    if (s.empty()) return false;
    if (s.front() == '[') return true;  // list text
    bool digits = std::all_of(s.begin() + (s.front() == '-' ? 1 : 0), s.end(),
                              [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    if (digits && s != "-") return true;
    if (!std::islower(static_cast<unsigned char>(s.front()))) return false;
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::string print_name(std::string_view s) {
    if (plain_name(s)) return std::string(s);
    std::string out = "'";
    for (char c : s) {
        if (c == '\'' || c == '\\') out += '\\';
        out += c;
    }
    return out + "'";
}

std::string var_text(std::uint32_t i) {
    if (i < 26) return std::string(1, static_cast<char>('A' + i));
    return "V" + std::to_string(i);
}

} // namespace

std::string print_term(const Term& t) { return t.is_var() ? var_text(t.value) : print_name(t.symbol().name()); }

std::string print_atom(const Atom& a) {
    std::string s = print_name(a.pred.name.name());
    if (a.args.empty()) return s;
    s += '(';
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) s += ',';
        s += print_term(a.args[i]);
    }
    return s + ')';
}

std::string print_rule(const Rule& r) {
    std::string s = print_atom(r.head);
    for (std::size_t i = 0; i < r.body.size(); ++i) {
        s += i ? ", " : " :- ";
        s += print_atom(r.body[i]);
    }
    return s + '.';
}

// ---------------------------------------------------------------- lists

Symbol ListTable::intern(const std::vector<Term>& elements) {
    std::string text = "[";
    for (std::size_t i = 0; i < elements.size(); ++i) {
        if (i) text += ',';
        text += print_term(elements[i]);
    }
    text += ']';
    Symbol s = Symbol::intern(text);
    if (lists_.count(s)) return s;
    lists_.emplace(s, elements);
    if (!elements.empty()) intern(std::vector<Term>(elements.begin() + 1, elements.end()));
    return s;
}

void ListTable::add_facts(FactStore& facts) const {
    Predicate head("head", 2);
    Predicate tail("tail", 2);
    for (const auto& [sym, elems] : lists_) {
        if (elems.empty()) continue;
        std::vector<Term> rest(elems.begin() + 1, elems.end());
        std::string text = "[";
        for (std::size_t i = 0; i < rest.size(); ++i) {
            if (i) text += ',';
            text += print_term(rest[i]);
        }
        text += ']';
        facts.add(Atom(head, {Term::constant(sym), elems.front()}));
        facts.add(Atom(tail, {Term::constant(sym), Term::constant(text)}));
    }
}

// ---------------------------------------------------------------- parsing

namespace {

class Parser {
public:
    Parser(std::string_view text, ListTable* lists) : text_(text), lists_(lists) {}

    bool at_end() {
        skip();
        return pos_ >= text_.size();
    }

    // atom [":-" atom {"," atom}] "."
    Rule clause() {
        vars_.clear();
        next_var_ = 0;
        Rule r;
        r.head = atom();
        skip();
        if (peek(":-")) {
            advance(2);
            r.body.push_back(atom());
            while (skip(), peek(",")) {
                advance(1);
                r.body.push_back(atom());
            }
        }
        expect('.');
        return r;
    }

    Atom atom() {
        skip();
        std::string name = name_token();
        std::vector<Term> args;
        if (peek("(")) {
            advance(1);
            args.push_back(term());
            while (skip(), peek(",")) {
                advance(1);
                args.push_back(term());
            }
            expect(')');
        }
        Predicate pred(name, static_cast<std::uint32_t>(args.size()));
        return Atom(pred, std::move(args));
    }

    // kind "(" atom ")" "."
    std::pair<std::string, Atom> wrapped() {
        vars_.clear();
        next_var_ = 0;
        std::string kind = name_token();
        expect('(');
        Atom a = atom();
        expect(')');
        expect('.');
        return {kind, std::move(a)};
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }

    int line() const { return line_; }
    int col() const { return col_; }

private:
    Term term() {
        skip();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        char c = text_[pos_];
        if (c == '[') return list();
        if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
            std::string v = identifier();
            if (v == "_") return Term::var(next_var_++);
            auto it = vars_.find(v);
            if (it == vars_.end()) it = vars_.emplace(v, next_var_++).first;
            return Term::var(it->second);
        }
        return Term::constant(name_token());
    }

    Term list() {
        advance(1);
        std::vector<Term> elems;
        skip();
        if (!peek("]")) {
            elems.push_back(term());
            while (skip(), peek(",")) {
                advance(1);
                elems.push_back(term());
            }
        }
        expect(']');
        for (const auto& e : elems)
            if (e.is_var()) fail("variables inside lists are not supported");
        if (!lists_) fail("list terms are not allowed here");
        return Term::constant(lists_->intern(elems));
    }

    std::string name_token() {
        skip();
        if (pos_ >= text_.size()) fail("expected a name");
        char c = text_[pos_];
        if (c == '\'') return quoted();
        if (std::islower(static_cast<unsigned char>(c))) return identifier();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-') return number();
        fail(std::string("unexpected character '") + c + "'");
    }

    std::string identifier() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            advance(1);
        return std::string(text_.substr(start, pos_ - start));
    }

    std::string number() {
        std::size_t start = pos_;
        if (text_[pos_] == '-') advance(1);
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) fail("malformed number");
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance(1);
        return std::string(text_.substr(start, pos_ - start));
    }

    std::string quoted() {
        advance(1);
        std::string out;
        while (pos_ < text_.size() && text_[pos_] != '\'') {
            if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) advance(1);
            if (text_[pos_] == '\n') fail("newline inside quoted name");
            out += text_[pos_];
            advance(1);
        }
        if (pos_ >= text_.size()) fail("unterminated quoted name");
        advance(1);
        return out;
    }

    bool peek(std::string_view s) const { return text_.substr(pos_, s.size()) == s; }

    void expect(char c) {
        skip();
        if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
        advance(1);
    }

    void advance(std::size_t n) {
        for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) {
            if (text_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
    }

    void skip() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance(1);
            } else if (c == '%') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance(1);
            } else {
                break;
            }
        }
    }

    std::string_view text_;
    ListTable* lists_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    std::map<std::string, std::uint32_t> vars_;
    std::uint32_t next_var_ = 0;
};

std::int64_t int_arg(const Atom& a, std::size_t i, Parser& p) {
    std::string_view s = a.args[i].symbol().name();
    if (a.args[i].is_var() || s.empty()) p.fail("expected an integer in " + print_atom(a));
    try {
        std::size_t used = 0;
        auto v = std::stoll(std::string(s), &used);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        p.fail("expected an integer in " + print_atom(a));
    }
}

} // namespace

Clauses parse_clauses(std::string_view text, ListTable* lists) {
    Clauses out;
    Parser p(text, lists);
    while (!p.at_end()) {
        int line = p.line(), col = p.col();
        Rule r = p.clause();
        if (r.body.empty()) {
            if (!r.head.is_ground()) throw ParseError("fact is not ground: " + print_atom(r.head), line, col);
            out.facts.push_back(std::move(r.head));
        } else {
            if (!r.is_safe()) throw ParseError("unsafe rule: " + print_rule(r), line, col);
            out.rules.push_back(std::move(r));
        }
    }
    return out;
}

Program parse_program(std::string_view text, std::optional<Predicate> target) {
    Clauses c = parse_clauses(text);
    std::vector<Rule> rules = std::move(c.rules);
    for (auto& f : c.facts) rules.push_back(Rule{std::move(f), {}});
    if (rules.empty()) throw std::invalid_argument("program has no rules");
    for (const auto& r : rules)
        if (r.body.empty()) throw std::invalid_argument("program rules need a body: " + print_rule(r));
    Predicate t = target ? *target : rules.front().head.pred;
    return Program::make(std::move(rules), t);
}

Examples parse_examples(std::string_view text, ListTable* lists) {
    Examples out;
    Parser p(text, lists);
    while (!p.at_end()) {
        int line = p.line(), col = p.col();
        auto [kind, a] = p.wrapped();
        if (!a.is_ground()) throw ParseError("example is not ground: " + print_atom(a), line, col);
        if (kind == "pos") out.pos.push_back(std::move(a));
        else if (kind == "neg") out.neg.push_back(std::move(a));
        else throw ParseError("expected pos(...) or neg(...), found " + kind, line, col);
    }
    return out;
}

Bias parse_bias(std::string_view text) {
    Bias b;
    bool have_head = false;
    Parser p(text, nullptr);
    std::vector<std::tuple<std::string, std::int64_t, std::string, int, int>> consts;
    while (!p.at_end()) {
        int line = p.line(), col = p.col();
        Rule r = p.clause();
        const Atom& a = r.head;
        std::string_view k = a.pred.name.name();
        auto need = [&](std::size_t n) {
            if (!r.body.empty() || a.args.size() != n || !a.is_ground())
                throw ParseError("malformed bias statement " + print_atom(a), line, col);
        };
        if (k == "head_pred" || k == "body_pred") {
            need(2);
            Predicate pr(a.args[0].symbol(), static_cast<std::uint32_t>(int_arg(a, 1, p)));
            if (k == "head_pred") {
                if (have_head) throw ParseError("duplicate head_pred", line, col);
                b.head = pr;
                have_head = true;
            } else {
                b.body.push_back(pr);
            }
        } else if (k == "max_vars") {
            need(1);
            b.max_vars = static_cast<int>(int_arg(a, 0, p));
        } else if (k == "max_body") {
            need(1);
            b.max_body = static_cast<int>(int_arg(a, 0, p));
        } else if (k == "max_rules") {
            need(1);
            b.max_rules = static_cast<int>(int_arg(a, 0, p));
        } else if (k == "enable_recursion") {
            need(1);
            std::string_view v = a.args[0].symbol().name();
            if (v != "true" && v != "false") throw ParseError("enable_recursion expects true or false", line, col);
            b.enable_recursion = v == "true";
        } else if (k == "constant") {
            need(3);
            consts.emplace_back(std::string(a.args[0].symbol().name()), int_arg(a, 1, p),
                                std::string(a.args[2].symbol().name()), line, col);
        } else {
            throw ParseError("unknown bias statement " + std::string(k), line, col);
        }
    }
    if (!have_head) throw ParseError("missing head_pred", p.line(), p.col());
    std::sort(b.body.begin(), b.body.end());
    b.body.erase(std::unique(b.body.begin(), b.body.end()), b.body.end());
    for (const auto& [name, pos, sym, line, col] : consts) {
        std::optional<Predicate> pred;
        for (const auto& q : b.body)
            if (q.name.name() == name) pred = q;
        if (!pred && b.head.name.name() == name) pred = b.head;
        if (!pred) throw ParseError("constant for undeclared predicate " + name, line, col);
        if (pos < 0 || pos >= static_cast<std::int64_t>(pred->arity))
            throw ParseError("constant position out of range for " + name, line, col);
        b.constants[{*pred, static_cast<int>(pos)}].push_back(Symbol::intern(sym));
    }
    for (auto& [key, syms] : b.constants) {
        std::sort(syms.begin(), syms.end());
        syms.erase(std::unique(syms.begin(), syms.end()), syms.end());
    }
    return b;
}

} // namespace rulejoin

namespace rulejoin {

void TaskSpec::validate() const {
    bias.validate();
    for (const auto* set : {&pos, &neg})
        for (const auto& e : *set) {
            if (!(e.pred == bias.head))
                throw std::invalid_argument("example " + print_atom(e) + " does not match head_pred " +
                                            std::string(bias.head.name.name()) + "/" +
                                            std::to_string(bias.head.arity));
            if (!e.is_ground()) throw std::invalid_argument("example is not ground: " + print_atom(e));
        }
    for (const auto& r : bk.rules) {
        if (r.head.pred.name == bias.head.name)
            throw BiasViolation("background rule defines the target predicate: " + print_rule(r));
        for (const auto& a : r.body)
            if (a.pred.name == bias.head.name)
                throw BiasViolation("background rule uses the target predicate in its body: " + print_rule(r));
    }
    auto check_arity = [&](const Predicate& p) {
        for (const auto& d : bias.body)
            if (d.name == p.name && d.arity != p.arity)
                throw std::invalid_argument("arity mismatch for " + std::string(p.name.name()) + ": declared " +
                                            std::to_string(d.arity) + ", used with " + std::to_string(p.arity));
    };
    for (const auto& p : bk.facts.predicates()) check_arity(p);
    for (const auto& r : bk.rules) check_arity(r.head.pred);
}

TaskSpec parse_task_text(std::string_view bk, std::string_view exs, std::string_view bias) {
    TaskSpec t;
    ListTable lists;
    Clauses c = parse_clauses(bk, &lists);
    for (const auto& f : c.facts) t.bk.facts.add(f);
    t.bk.rules = std::move(c.rules);
    Examples e = parse_examples(exs, &lists);
    t.bias = parse_bias(bias);
    auto dedup = [](std::vector<Atom>& v) {
        std::vector<Atom> out;
        std::set<Atom> seen;
        for (auto& a : v)
            if (seen.insert(a).second) out.push_back(std::move(a));
        v = std::move(out);
    };
    dedup(e.pos);
    dedup(e.neg);
    t.pos = std::move(e.pos);
    t.neg = std::move(e.neg);
    lists.add_facts(t.bk.facts);
    t.validate();
    return t;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

TaskSpec parse_task(const std::filesystem::path& bk, const std::filesystem::path& exs,
                    const std::filesystem::path& bias) {
    return parse_task_text(read_file(bk), read_file(exs), read_file(bias));
}

std::vector<Atom> facts_of(const FactStore& s) {
    std::vector<Atom> out;
    for (const auto& p : s.predicates()) {
        const Relation* r = s.relation(p);
        for (std::size_t i = 0; i < r->size(); ++i) {
            std::vector<Term> args;
            for (auto v : r->row(i)) args.push_back(Term::constant(Symbol::from_id(v)));
            out.emplace_back(p, std::move(args));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string print_background(const Background& bk) {
    std::string s;
    for (const auto& f : facts_of(bk.facts)) s += print_atom(f) + ".\n";
    for (const auto& r : bk.rules) s += print_rule(r) + "\n";
    return s;
}

std::string print_examples(const std::vector<Atom>& pos, const std::vector<Atom>& neg) {
    std::string s;
    for (const auto& a : pos) s += "pos(" + print_atom(a) + ").\n";
    for (const auto& a : neg) s += "neg(" + print_atom(a) + ").\n";
    return s;
}

std::string print_bias(const Bias& b) {
    std::ostringstream os;
    os << "head_pred(" << print_name(b.head.name.name()) << ',' << b.head.arity << ").\n";
    for (const auto& p : b.body) os << "body_pred(" << print_name(p.name.name()) << ',' << p.arity << ").\n";
    os << "max_vars(" << b.max_vars << ").\n";
    os << "max_body(" << b.max_body << ").\n";
    os << "max_rules(" << b.max_rules << ").\n";
    os << "enable_recursion(" << (b.enable_recursion ? "true" : "false") << ").\n";
    for (const auto& [key, syms] : b.constants)
        for (Symbol s : syms)
            os << "constant(" << print_name(key.first.name.name()) << ',' << key.second << ',' << print_name(s.name())
               << ").\n";
    return os.str();
}

double evaluate(const std::optional<Program>& h, const Background& bk, const std::vector<Atom>& pos,
                const std::vector<Atom>& neg) {
    std::size_t total = pos.size() + neg.size();
    if (total == 0) return 1.0;
    if (!h) return static_cast<double>(neg.size()) / static_cast<double>(total);
    CoverageRecord c = coverage(*h, bk, pos, neg);
    return static_cast<double>(c.tp + (neg.size() - c.fp)) / static_cast<double>(total);
}

} // namespace rulejoin
