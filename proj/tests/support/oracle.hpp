#pragma once

// Brute-force reference implementations used as test oracles. Nothing in
// here calls the CNF conversion, the solver, or the feature-model analyses.

#include "safesple/logic/formula.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using safesple::logic::Connective;
using safesple::logic::Formula;

inline bool eval(const Formula& f, const std::map<std::string, bool>& v) {
    auto ops = f.operands();
    switch (f.connective()) {
    case Connective::constant_true: return true;
    case Connective::constant_false: return false;
    case Connective::variable: return v.at(f.name());
    case Connective::negation: return !eval(ops[0], v);
    case Connective::conjunction: {
        bool r = true;
        for (const auto& o : ops) r = r && eval(o, v);
        return r;
    }
    case Connective::disjunction: {
        bool r = false;
        for (const auto& o : ops) r = r || eval(o, v);
        return r;
    }
    case Connective::implication: return !eval(ops[0], v) || eval(ops[1], v);
    case Connective::biconditional: return eval(ops[0], v) == eval(ops[1], v);
    case Connective::exactly_one: {
        int n = 0;
        for (const auto& o : ops) n += eval(o, v) ? 1 : 0;
        return n == 1;
    }
    }
    return false;
}

/// Calls fn(assignment) for every assignment of `vars`, in lexicographic
/// order with false < true (first variable most significant).
template <typename Fn>
void for_each_assignment(const std::vector<std::string>& vars, Fn&& fn) {
    const std::size_t n = vars.size();
    std::map<std::string, bool> a;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
        for (std::size_t i = 0; i < n; ++i) a[vars[i]] = (bits >> (n - 1 - i)) & 1u;
        fn(a);
    }
}

/// Truth-table count over `over`; `over` must contain every variable of f.
inline std::uint64_t count(const Formula& f, const std::set<std::string>& over) {
    std::vector<std::string> vars(over.begin(), over.end());
    std::uint64_t n = 0;
    for_each_assignment(vars, [&](const auto& a) { n += eval(f, a) ? 1 : 0; });
    return n;
}

inline std::vector<std::map<std::string, bool>> models(const Formula& f, const std::set<std::string>& over) {
    std::vector<std::string> vars(over.begin(), over.end());
    std::vector<std::map<std::string, bool>> out;
    for_each_assignment(vars, [&](const auto& a) {
        if (eval(f, a)) out.push_back(a);
    });
    return out;
}

/// Random formula over variables v0..v{nvars-1}, depth-bounded, using every
/// connective including n-ary exactly-one and the constants.
class FormulaGenerator {
public:
    explicit FormulaGenerator(std::uint32_t seed) : rng_(seed) {}

    Formula operator()(int nvars, int depth) { return gen(nvars, depth); }

    std::mt19937& rng() { return rng_; }

private:
    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    Formula leaf(int nvars) {
        const int r = pick(0, 40);
        if (r == 0) return Formula::top();
        if (r == 1) return Formula::bottom();
        return Formula::var("v" + std::to_string(pick(0, nvars - 1)));
    }

    Formula gen(int nvars, int depth) {
        if (depth == 0 || pick(0, 5) == 0) return leaf(nvars);
        auto many = [&](int lo, int hi) {
            std::vector<Formula> ops;
            const int k = pick(lo, hi);
            for (int i = 0; i < k; ++i) ops.push_back(gen(nvars, depth - 1));
            return ops;
        };
        switch (pick(0, 5)) {
        case 0: return safesple::logic::negate(gen(nvars, depth - 1));
        case 1: return safesple::logic::conjoin(many(2, 4));
        case 2: return safesple::logic::disjoin(many(2, 4));
        case 3: return safesple::logic::implies(gen(nvars, depth - 1), gen(nvars, depth - 1));
        case 4: return safesple::logic::iff(gen(nvars, depth - 1), gen(nvars, depth - 1));
        default: return safesple::logic::exactly_one(many(2, 4));
        }
    }

    std::mt19937 rng_;
};

/// Random 3-CNF with `clauses` clauses over v0..v{nvars-1}.
inline Formula random_3cnf(std::mt19937& rng, int nvars, int clauses) {
    std::uniform_int_distribution<int> var(0, nvars - 1);
    std::bernoulli_distribution sign(0.5);
    std::vector<Formula> cs;
    for (int i = 0; i < clauses; ++i) {
        std::vector<Formula> lits;
        for (int j = 0; j < 3; ++j) {
            Formula x = Formula::var("v" + std::to_string(var(rng)));
            lits.push_back(sign(rng) ? x : safesple::logic::negate(x));
        }
        cs.push_back(safesple::logic::disjoin(std::move(lits)));
    }
    return safesple::logic::conjoin(std::move(cs));
}

} // namespace oracle
