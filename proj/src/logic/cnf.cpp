#include "safesple/logic/cnf.hpp"

#include <algorithm>
#include <unordered_map>

namespace safesple::logic {

bool CnfFormula::is_constant_false() const noexcept {
    return std::any_of(clauses.begin(), clauses.end(), [](const Clause& c) { return c.empty(); });
}

namespace {

bool is_true(const Formula& f) { return f.connective() == Connective::constant_true; }
bool is_false(const Formula& f) { return f.connective() == Connective::constant_false; }

// Folds constants away. The result is either a constant or constant-free.
class Simplifier {
public:
    Formula run(const Formula& f) {
        auto it = memo_.find(f.identity());
        if (it != memo_.end()) return it->second.second;
        Formula out = simplify(f);
        memo_.emplace(f.identity(), std::pair{f, out});
        return out;
    }

private:
    Formula simplify(const Formula& f) {
        auto ops = f.operands();
        switch (f.connective()) {
        case Connective::constant_true:
        case Connective::constant_false:
        case Connective::variable:
            return f;
        case Connective::negation: {
            Formula a = run(ops[0]);
            if (is_true(a)) return Formula::bottom();
            if (is_false(a)) return Formula::top();
            if (a.connective() == Connective::negation) return a.operands()[0];
            return negate(a);
        }
        case Connective::conjunction: {
            std::vector<Formula> kept;
            for (const auto& op : ops) {
                Formula s = run(op);
                if (is_false(s)) return Formula::bottom();
                if (!is_true(s)) kept.push_back(s);
            }
            return conjoin(std::move(kept));
        }
        case Connective::disjunction: {
            std::vector<Formula> kept;
            for (const auto& op : ops) {
                Formula s = run(op);
                if (is_true(s)) return Formula::top();
                if (!is_false(s)) kept.push_back(s);
            }
            return disjoin(std::move(kept));
        }
        case Connective::implication: {
            Formula a = run(ops[0]);
            Formula b = run(ops[1]);
            if (is_false(a) || is_true(b)) return Formula::top();
            if (is_true(a)) return b;
            if (is_false(b)) return run(negate(a));
            return implies(a, b);
        }
        case Connective::biconditional: {
            Formula a = run(ops[0]);
            Formula b = run(ops[1]);
            if (is_true(a)) return b;
            if (is_true(b)) return a;
            if (is_false(a)) return run(negate(b));
            if (is_false(b)) return run(negate(a));
            return iff(a, b);
        }
        case Connective::exactly_one: {
            std::vector<Formula> open;
            int trues = 0;
            for (const auto& op : ops) {
                Formula s = run(op);
                if (is_true(s)) ++trues;
                else if (!is_false(s)) open.push_back(s);
            }
            if (trues > 1) return Formula::bottom();
            if (trues == 1) {
                std::vector<Formula> negs;
                for (const auto& o : open) negs.push_back(run(negate(o)));
                return conjoin(std::move(negs));
            }
            return exactly_one(std::move(open));
        }
        }
        return f;
    }

    // keys are kept alive so a freed node's address is never reused as a key
    std::unordered_map<const void*, std::pair<Formula, Formula>> memo_;
};

class Encoder {
public:
    explicit Encoder(CnfFormula& cnf) : cnf_(cnf) {}

    // Literal equivalent to `f` under the gate definitions emitted so far.
    Literal encode(const Formula& f) {
        if (f.connective() == Connective::variable) return cnf_.index.at(f.name());
        if (f.connective() == Connective::negation) return -encode(f.operands()[0]);
        auto it = memo_.find(f.identity());
        if (it != memo_.end()) return it->second;
        Literal g = gate(f);
        memo_.emplace(f.identity(), g);
        return g;
    }

    // Emits `f` as a top-level conjunct, without a gate where the shape allows.
    void assert_formula(const Formula& f) {
        switch (f.connective()) {
        case Connective::conjunction:
            for (const auto& op : f.operands()) assert_formula(op);
            return;
        case Connective::disjunction:
            if (all_literals(f.operands())) {
                Clause c;
                for (const auto& op : f.operands()) c.push_back(encode(op));
                emit(std::move(c));
                return;
            }
            break;
        case Connective::implication:
            if (all_literals(f.operands())) {
                emit({-encode(f.operands()[0]), encode(f.operands()[1])});
                return;
            }
            break;
        case Connective::exactly_one:
            if (all_literals(f.operands())) {
                auto lits = encode_all(f.operands());
                emit(lits);
                at_most_one(lits);
                return;
            }
            break;
        default:
            break;
        }
        emit({encode(f)});
    }

private:
    static bool is_literal(const Formula& f) {
        if (f.connective() == Connective::variable) return true;
        return f.connective() == Connective::negation && is_literal(f.operands()[0]);
    }

    static bool all_literals(std::span<const Formula> ops) {
        return std::all_of(ops.begin(), ops.end(), is_literal);
    }

    std::vector<Literal> encode_all(std::span<const Formula> ops) {
        std::vector<Literal> lits;
        lits.reserve(ops.size());
        for (const auto& op : ops) lits.push_back(encode(op));
        return lits;
    }

    Literal fresh() {
        const int v = static_cast<int>(cnf_.variables.size()) + 1;
        std::string name = "$aux" + std::to_string(v - static_cast<int>(cnf_.original_count));
        cnf_.variables.push_back(name);
        cnf_.index.emplace(std::move(name), v);
        return v;
    }

    void emit(Clause c) { cnf_.clauses.push_back(std::move(c)); }

    void at_most_one(const std::vector<Literal>& lits) {
        for (std::size_t i = 0; i < lits.size(); ++i)
            for (std::size_t j = i + 1; j < lits.size(); ++j) emit({-lits[i], -lits[j]});
    }

    Literal and_gate(const std::vector<Literal>& lits) {
        Literal g = fresh();
        Clause back{g};
        for (Literal l : lits) {
            emit({-g, l});
            back.push_back(-l);
        }
        emit(std::move(back));
        return g;
    }

    Literal or_gate(const std::vector<Literal>& lits) {
        Literal g = fresh();
        Clause fwd{-g};
        for (Literal l : lits) {
            emit({g, -l});
            fwd.push_back(l);
        }
        emit(std::move(fwd));
        return g;
    }

    Literal gate(const Formula& f) {
        auto ops = f.operands();
        switch (f.connective()) {
        case Connective::conjunction: return and_gate(encode_all(ops));
        case Connective::disjunction: return or_gate(encode_all(ops));
        case Connective::implication: return or_gate({-encode(ops[0]), encode(ops[1])});
        case Connective::biconditional: {
            Literal a = encode(ops[0]);
            Literal b = encode(ops[1]);
            Literal g = fresh();
            emit({-g, -a, b});
            emit({-g, a, -b});
            emit({g, a, b});
            emit({g, -a, -b});
            return g;
        }
        case Connective::exactly_one: {
            auto lits = encode_all(ops);
            std::vector<Literal> parts{or_gate(lits)};
            for (std::size_t i = 0; i < lits.size(); ++i)
                for (std::size_t j = i + 1; j < lits.size(); ++j) parts.push_back(or_gate({-lits[i], -lits[j]}));
            return and_gate(parts);
        }
        default:
            // constants are folded before encoding; variables and negations never reach here
            return encode(f);
        }
    }

    CnfFormula& cnf_;
    std::unordered_map<const void*, Literal> memo_;
};

} // namespace

CnfFormula to_cnf(const Formula& f) {
    CnfFormula cnf;
    for (const auto& name : f.variables()) {
        cnf.variables.push_back(name);
        cnf.index.emplace(name, static_cast<int>(cnf.variables.size()));
    }
    cnf.original_count = cnf.variables.size();

    Simplifier simplifier;
    Formula s = simplifier.run(f);
    if (is_true(s)) return cnf;
    if (is_false(s)) {
        cnf.clauses.emplace_back();
        return cnf;
    }
    Encoder(cnf).assert_formula(s);
    return cnf;
}

} // namespace safesple::logic
