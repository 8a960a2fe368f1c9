#include "safesple/fm/dsl.hpp"

#include "safesple/error.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace safesple::fm {

namespace {

enum class Tok { word, string, lbrace, rbrace, lparen, rparen, comma, end };

struct Token {
    Tok kind;
    std::string text;
    std::size_t line;
    std::size_t column;
};

bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_space();
        const std::size_t line = line_, col = col_;
        if (pos_ >= src_.size()) return {Tok::end, "", line, col};
        const char c = src_[pos_];
        auto single = [&](Tok k) {
            advance();
            return Token{k, std::string(1, c), line, col};
        };
        switch (c) {
        case '{': return single(Tok::lbrace);
        case '}': return single(Tok::rbrace);
        case '(': return single(Tok::lparen);
        case ')': return single(Tok::rparen);
        case ',': return single(Tok::comma);
        case '"': return string_literal(line, col);
        default: break;
        }
        if (!word_char(c)) throw ParseError(line, col, std::string("unexpected character '") + c + "'");
        std::string w;
        while (pos_ < src_.size() && word_char(src_[pos_])) {
            w += src_[pos_];
            advance();
        }
        return {Tok::word, std::move(w), line, col};
    }

private:
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else {
                break;
            }
        }
    }

    Token string_literal(std::size_t line, std::size_t col) {
        advance(); // opening quote
        std::string out;
        for (;;) {
            if (pos_ >= src_.size() || src_[pos_] == '\n') throw ParseError(line, col, "unterminated string");
            char c = src_[pos_];
            if (c == '"') {
                advance();
                return {Tok::string, std::move(out), line, col};
            }
            if (c == '\\') {
                advance();
                if (pos_ >= src_.size()) throw ParseError(line, col, "unterminated string");
                c = src_[pos_];
                if (c != '"' && c != '\\') throw ParseError(line_, col_, "unknown escape in string");
            }
            out += c;
            advance();
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

const std::set<std::string>& keywords() {
    static const std::set<std::string> k{"model",   "feature",  "abstract", "mandatory", "optional",
                                         "group",   "or",       "xor",      "and",       "not",
                                         "implies", "iff",      "true",     "false",     "constraint",
                                         "hazard",  "contributing", "mitigating", "nodes"};
    return k;
}

bool is_identifier(const std::string& s) {
    if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return !keywords().count(s);
}

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) { shift(); }

    FeatureModel run() {
        expect_keyword("model");
        std::string name = identifier("model name");
        expect_keyword("feature");
        const Token root_tok = tok_;
        std::string root = identifier("feature name");
        const bool abs = accept_keyword("abstract");
        FeatureModel model(std::move(name), std::move(root), abs);
        body(model, model.root());

        while (tok_.kind != Tok::end) {
            if (accept_keyword("constraint")) {
                const Token at = tok_;
                logic::Formula f = expr();
                semantic(at, [&] { model.add_constraint(std::move(f)); });
            } else if (is_keyword("hazard")) {
                hazard(model);
            } else {
                fail("expected 'constraint' or 'hazard'");
            }
        }
        semantic(root_tok, [&] { model.validate(); });
        return model;
    }

private:
    void shift() { tok_ = lex_.next(); }

    [[noreturn]] void fail(const std::string& what) const {
        const std::string found = tok_.kind == Tok::end ? "end of input" : "'" + tok_.text + "'";
        throw ParseError(tok_.line, tok_.column, what + ", found " + found);
    }

    template <typename Fn>
    void semantic(const Token& at, Fn&& fn) {
        try {
            fn();
        } catch (const SemanticError& e) {
            throw SemanticError(std::to_string(at.line) + ":" + std::to_string(at.column) + ": " + e.what());
        }
    }

    bool is_keyword(const char* kw) const { return tok_.kind == Tok::word && tok_.text == kw; }

    bool accept_keyword(const char* kw) {
        if (!is_keyword(kw)) return false;
        shift();
        return true;
    }

    void expect_keyword(const char* kw) {
        if (!accept_keyword(kw)) fail(std::string("expected '") + kw + "'");
    }

    void expect(Tok kind, const char* what) {
        if (tok_.kind != kind) fail(std::string("expected ") + what);
        shift();
    }

    std::string identifier(const char* what) {
        if (tok_.kind != Tok::word || !is_identifier(tok_.text)) fail(std::string("expected ") + what);
        std::string s = tok_.text;
        shift();
        return s;
    }

    std::string word(const char* what) {
        if (tok_.kind != Tok::word) fail(std::string("expected ") + what);
        std::string s = tok_.text;
        shift();
        return s;
    }

    void body(FeatureModel& model, FeatureId parent) {
        expect(Tok::lbrace, "'{'");
        while (tok_.kind != Tok::rbrace) {
            const Token at = tok_;
            if (is_keyword("mandatory") || is_keyword("optional")) {
                const auto opt = tok_.text == "mandatory" ? Optionality::mandatory : Optionality::optional;
                shift();
                std::string name = identifier("feature name");
                const bool abs = accept_keyword("abstract");
                FeatureId id = 0;
                semantic(at, [&] { id = model.add_child(parent, std::move(name), opt, abs); });
                body(model, id);
            } else if (accept_keyword("group")) {
                GroupKind kind;
                if (accept_keyword("or")) kind = GroupKind::or_group;
                else if (accept_keyword("xor")) kind = GroupKind::xor_group;
                else fail("expected 'or' or 'xor'");
                if (model.feature(parent).group != GroupKind::none)
                    throw SemanticError(std::to_string(at.line) + ":" + std::to_string(at.column) + ": feature '" +
                                        model.feature(parent).name + "' already has children; a group must be its only content");
                expect(Tok::lbrace, "'{'");
                do {
                    const Token m = tok_;
                    std::string name = identifier("group member name");
                    const bool abs = accept_keyword("abstract");
                    FeatureId id = 0;
                    semantic(m, [&] { id = model.add_group_member(parent, kind, std::move(name), abs); });
                    body(model, id);
                } while (tok_.kind != Tok::rbrace);
                shift();
            } else {
                fail("expected 'mandatory', 'optional', 'group' or '}'");
            }
        }
        shift();
    }

    logic::Formula expr() {
        if (tok_.kind != Tok::word) fail("expected expression");
        const Token head = tok_;
        shift();
        if (head.text == "true") return logic::Formula::top();
        if (head.text == "false") return logic::Formula::bottom();
        static const std::set<std::string> ops{"and", "or", "not", "implies", "iff", "xor"};
        if (!ops.count(head.text)) {
            if (!is_identifier(head.text))
                throw ParseError(head.line, head.column, "'" + head.text + "' is not a feature name");
            if (tok_.kind == Tok::lparen)
                throw ParseError(head.line, head.column, "unknown operator '" + head.text + "'");
            return logic::Formula::var(head.text);
        }
        expect(Tok::lparen, "'('");
        std::vector<logic::Formula> args{expr()};
        while (tok_.kind == Tok::comma) {
            shift();
            args.push_back(expr());
        }
        expect(Tok::rparen, "')' or ','");
        const std::size_t n = args.size();
        auto arity = [&](bool ok, const char* need) {
            if (!ok) throw ParseError(head.line, head.column, head.text + " takes " + need + " operands");
        };
        if (head.text == "not") {
            arity(n == 1, "1");
            return logic::negate(args[0]);
        }
        if (head.text == "implies") {
            arity(n == 2, "2");
            return logic::implies(args[0], args[1]);
        }
        if (head.text == "iff") {
            arity(n == 2, "2");
            return logic::iff(args[0], args[1]);
        }
        arity(n >= 2, "at least 2");
        if (head.text == "and") return logic::conjoin(std::move(args));
        if (head.text == "or") return logic::disjoin(std::move(args));
        return logic::exactly_one(std::move(args));
    }

    void hazard(FeatureModel& model) {
        const Token at = tok_;
        shift();
        HazardTrace trace;
        trace.hazard_id = word("hazard id");
        if (tok_.kind != Tok::string) fail("expected hazard description string");
        trace.description = tok_.text;
        shift();
        expect(Tok::lbrace, "'{'");
        while (tok_.kind != Tok::rbrace) {
            std::vector<std::string>* list = nullptr;
            bool features = true;
            if (accept_keyword("contributing")) list = &trace.contributing_features;
            else if (accept_keyword("mitigating")) list = &trace.mitigating_features;
            else if (accept_keyword("nodes")) {
                list = &trace.template_node_ids;
                features = false;
            } else fail("expected 'contributing', 'mitigating', 'nodes' or '}'");
            list->push_back(features ? identifier("feature name") : word("node id"));
            while (tok_.kind == Tok::comma) {
                shift();
                list->push_back(features ? identifier("feature name") : word("node id"));
            }
        }
        shift();
        semantic(at, [&] { model.add_hazard(std::move(trace)); });
    }

    Lexer lex_;
    Token tok_{Tok::end, "", 1, 1};
};

void unparse_feature(const FeatureModel& m, FeatureId id, int depth, std::ostringstream& out) {
    const Feature& f = m.feature(id);
    const std::string pad(static_cast<std::size_t>(depth) * 4, ' ');
    out << f.name << (f.is_abstract ? " abstract" : "") << " {";
    if (f.children.empty()) {
        out << "}\n";
        return;
    }
    out << '\n';
    const std::string inner = pad + "    ";
    if (f.group == GroupKind::or_group || f.group == GroupKind::xor_group) {
        out << inner << "group " << (f.group == GroupKind::or_group ? "or" : "xor") << " {\n";
        for (FeatureId c : f.children) {
            out << inner << "    ";
            unparse_feature(m, c, depth + 2, out);
        }
        out << inner << "}\n";
    } else {
        for (FeatureId c : f.children) {
            out << inner << to_string(m.feature(c).optionality) << ' ';
            unparse_feature(m, c, depth + 1, out);
        }
    }
    out << pad << "}\n";
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

void list_line(std::ostringstream& out, const char* kw, const std::vector<std::string>& items) {
    if (items.empty()) return;
    out << "    " << kw << ' ';
    for (std::size_t i = 0; i < items.size(); ++i) out << (i ? ", " : "") << items[i];
    out << '\n';
}

} // namespace

FeatureModel parse_feature_model(std::string_view source) { return Parser(source).run(); }

FeatureModel load_feature_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read feature model " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_feature_model(buf.str());
}

std::string unparse(const FeatureModel& model) {
    std::ostringstream out;
    out << "model " << model.name() << "\n\nfeature ";
    unparse_feature(model, model.root(), 0, out);
    if (!model.constraints().empty()) out << '\n';
    for (const auto& c : model.constraints()) out << "constraint " << c.to_string() << '\n';
    for (const auto& h : model.hazards()) {
        out << "\nhazard " << h.hazard_id << ' ' << quote(h.description) << " {\n";
        list_line(out, "contributing", h.contributing_features);
        list_line(out, "mitigating", h.mitigating_features);
        list_line(out, "nodes", h.template_node_ids);
        out << "}\n";
    }
    return out.str();
}

} // namespace safesple::fm
