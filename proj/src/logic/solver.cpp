#include "safesple/logic/solver.hpp"

#include "safesple/error.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace safesple::logic {

namespace {

using Clauses = std::vector<Clause>;

int var_of(Literal l) { return std::abs(l); }

// Sorts and deduplicates literals, drops tautologies.
Clauses normalize(const Clauses& in) {
    Clauses out;
    out.reserve(in.size());
    for (Clause c : in) {
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        bool tautology = false;
        for (Literal l : c)
            if (l > 0 && std::binary_search(c.begin(), c.end(), -l)) tautology = true;
        if (!tautology) out.push_back(std::move(c));
    }
    return out;
}

// Makes `lit` true. Returns false when some clause becomes empty.
bool condition(Clauses& cs, Literal lit) {
    Clauses out;
    out.reserve(cs.size());
    for (auto& c : cs) {
        if (std::find(c.begin(), c.end(), lit) != c.end()) continue;
        auto neg = std::find(c.begin(), c.end(), -lit);
        if (neg != c.end()) {
            if (c.size() == 1) return false;
            Clause reduced;
            reduced.reserve(c.size() - 1);
            for (Literal l : c)
                if (l != -lit) reduced.push_back(l);
            out.push_back(std::move(reduced));
        } else {
            out.push_back(std::move(c));
        }
    }
    cs = std::move(out);
    return true;
}

// Unit propagation to fixpoint; implied literals are appended to `trail`.
bool propagate(Clauses& cs, std::vector<Literal>& trail) {
    for (;;) {
        auto unit = std::find_if(cs.begin(), cs.end(), [](const Clause& c) { return c.size() == 1; });
        if (unit == cs.end()) return true;
        const Literal l = unit->front();
        trail.push_back(l);
        if (!condition(cs, l)) return false;
    }
}

int smallest_var(const Clauses& cs) {
    int best = std::numeric_limits<int>::max();
    for (const auto& c : cs)
        for (Literal l : c) best = std::min(best, var_of(l));
    return best;
}

bool search(Clauses cs, std::vector<Literal>& trail) {
    const std::size_t mark = trail.size();
    if (!propagate(cs, trail)) {
        trail.resize(mark);
        return false;
    }
    if (cs.empty()) return true;
    const int v = smallest_var(cs);
    for (Literal l : {v, -v}) {
        Clauses branch = cs;
        const std::size_t before = trail.size();
        trail.push_back(l);
        if (condition(branch, l) && search(std::move(branch), trail)) return true;
        trail.resize(before);
    }
    trail.resize(mark);
    return false;
}

bool satisfiable(const Clauses& cs) {
    std::vector<Literal> trail;
    return search(cs, trail);
}

Count pow2(std::size_t n) {
    Count c = 1;
    c <<= n;
    return c;
}

// Projected model counting: branch on projection variables, decompose the
// residual clause set into variable-disjoint components, multiply their
// counts, and cache component results by their canonical clause set.
class ProjectedCounter {
public:
    ProjectedCounter(std::size_t var_count, const std::vector<int>& projection)
        : is_projected_(var_count + 1, 0) {
        for (int v : projection)
            if (v >= 1 && static_cast<std::size_t>(v) <= var_count) is_projected_[v] = 1;
    }

    Count count(const Clauses& input) {
        Clauses cs = normalize(input);
        for (const auto& c : cs)
            if (c.empty()) return 0;
        std::vector<Literal> trail;
        if (!propagate(cs, trail)) return 0;

        std::vector<char> gone(is_projected_.size(), 0);
        for (Literal l : trail) gone[var_of(l)] = 1;
        for (const auto& c : cs)
            for (Literal l : c) gone[var_of(l)] = 1;
        std::size_t free = 0;
        for (std::size_t v = 1; v < is_projected_.size(); ++v)
            if (is_projected_[v] && !gone[v]) ++free;
        return pow2(free) * count_components(cs);
    }

private:
    Count count_components(const Clauses& cs) {
        if (cs.empty()) return 1;
        Count product = 1;
        for (auto& component : split(cs)) {
            product *= count_component(std::move(component));
            if (product == 0) break;
        }
        return product;
    }

    std::vector<Clauses> split(const Clauses& cs) {
        std::unordered_map<int, int> parent;
        auto find = [&](int v) {
            auto it = parent.try_emplace(v, v).first;
            int root = it->first;
            while (parent[root] != root) root = parent[root];
            while (parent[v] != root) {
                int next = parent[v];
                parent[v] = root;
                v = next;
            }
            return root;
        };
        for (const auto& c : cs) {
            const int first = find(var_of(c.front()));
            for (Literal l : c) {
                const int r = find(var_of(l));
                if (r != first) parent[r] = first;
            }
        }
        std::unordered_map<int, std::size_t> slot;
        std::vector<Clauses> groups;
        for (const auto& c : cs) {
            const int root = find(var_of(c.front()));
            auto [it, inserted] = slot.try_emplace(root, groups.size());
            if (inserted) groups.emplace_back();
            groups[it->second].push_back(c);
        }
        return groups;
    }

    static std::string key_of(Clauses& cs) {
        std::sort(cs.begin(), cs.end());
        std::string key;
        for (const auto& c : cs) {
            for (Literal l : c) {
                key += std::to_string(l);
                key += ' ';
            }
            key += '|';
        }
        return key;
    }

    Count count_component(Clauses cs) {
        std::string key = key_of(cs);
        if (auto hit = cache_.find(key); hit != cache_.end()) return hit->second;

        std::vector<int> projected;
        for (const auto& c : cs)
            for (Literal l : c)
                if (is_projected_[var_of(l)]) projected.push_back(var_of(l));
        std::sort(projected.begin(), projected.end());
        projected.erase(std::unique(projected.begin(), projected.end()), projected.end());

        Count total = 0;
        if (projected.empty()) {
            total = satisfiable(cs) ? 1 : 0;
        } else {
            const int v = projected.front();
            for (Literal l : {v, -v}) {
                Clauses branch = cs;
                std::vector<Literal> trail{l};
                if (!condition(branch, l) || !propagate(branch, trail)) continue;
                std::vector<int> still;
                for (const auto& c : branch)
                    for (Literal x : c) still.push_back(var_of(x));
                for (Literal x : trail) still.push_back(var_of(x));
                std::sort(still.begin(), still.end());
                std::size_t free = 0;
                for (int p : projected)
                    if (!std::binary_search(still.begin(), still.end(), p)) ++free;
                total += pow2(free) * count_components(branch);
            }
        }
        cache_.emplace(std::move(key), total);
        return total;
    }

    std::vector<char> is_projected_;
    std::unordered_map<std::string, Count> cache_;
};

Assignment model_over_originals(const CnfFormula& cnf, const std::vector<Literal>& trail) {
    Assignment out;
    for (std::size_t i = 0; i < cnf.original_count; ++i) out[cnf.variables[i]] = false;
    for (Literal l : trail)
        if (!cnf.is_auxiliary(var_of(l))) out[cnf.variables[var_of(l) - 1]] = l > 0;
    return out;
}

class Enumerator {
public:
    Enumerator(const CnfFormula& cnf, const std::set<std::string>& over, EnumerationLimit limit)
        : cnf_(cnf), names_(over.begin(), over.end()), limit_(limit) {
        for (const auto& n : names_) {
            auto it = cnf.index.find(n);
            vars_.push_back(it == cnf.index.end() ? 0 : it->second);
        }
    }

    std::vector<Assignment> run() {
        Clauses cs = normalize(cnf_.clauses);
        for (const auto& c : cs)
            if (c.empty()) return {};
        std::vector<Literal> trail;
        if (!propagate(cs, trail) || !satisfiable(cs)) return {};
        std::vector<signed char> value(cnf_.variable_count() + 1, -1);
        for (Literal l : trail) value[var_of(l)] = l > 0;
        current_.assign(names_.size(), false);
        descend(0, cs, value);
        return std::move(out_);
    }

private:
    bool full() const { return limit_.max && out_.size() > *limit_.max; }

    void emit() {
        Assignment a;
        for (std::size_t i = 0; i < names_.size(); ++i) a[names_[i]] = current_[i];
        out_.push_back(std::move(a));
        if (limit_.max && out_.size() > *limit_.max) {
            if (limit_.exhaustive)
                throw CapacityError("model count exceeds enumeration limit of " + std::to_string(*limit_.max));
        }
    }

    // Invariant: `cs` is satisfiable.
    void descend(std::size_t i, const Clauses& cs, const std::vector<signed char>& value) {
        if (full()) return;
        if (i == names_.size()) {
            emit();
            return;
        }
        const int v = vars_[i];
        for (bool val : {false, true}) {
            if (full()) return;
            current_[i] = val;
            if (v == 0) {
                descend(i + 1, cs, value);
                continue;
            }
            if (value[v] >= 0) {
                if (static_cast<bool>(value[v]) == val) descend(i + 1, cs, value);
                continue;
            }
            Clauses branch = cs;
            const Literal l = val ? v : -v;
            std::vector<Literal> trail{l};
            if (!condition(branch, l) || !propagate(branch, trail) || !satisfiable(branch)) continue;
            auto next = value;
            for (Literal x : trail) next[var_of(x)] = x > 0;
            descend(i + 1, branch, next);
        }
    }

    const CnfFormula& cnf_;
    std::vector<std::string> names_;
    std::vector<int> vars_;
    EnumerationLimit limit_;
    std::vector<bool> current_;
    std::vector<Assignment> out_;
};

} // namespace

std::optional<Assignment> find_model(const CnfFormula& cnf) {
    Clauses cs = normalize(cnf.clauses);
    for (const auto& c : cs)
        if (c.empty()) return std::nullopt;
    std::vector<Literal> trail;
    if (!search(std::move(cs), trail)) return std::nullopt;
    return model_over_originals(cnf, trail);
}

std::optional<Assignment> is_satisfiable(const Formula& f) { return find_model(to_cnf(f)); }

Count count_projected(const CnfFormula& cnf, const std::vector<int>& projection, std::size_t extra_free) {
    ProjectedCounter counter(cnf.variable_count(), projection);
    return pow2(extra_free) * counter.count(cnf.clauses);
}

Count count_models_exact(const Formula& f, const std::set<std::string>& over) {
    const CnfFormula cnf = to_cnf(f);
    std::vector<int> projection;
    std::size_t extra = 0;
    for (const auto& name : over) {
        auto it = cnf.index.find(name);
        if (it == cnf.index.end() || cnf.is_auxiliary(it->second)) ++extra;
        else projection.push_back(it->second);
    }
    return count_projected(cnf, projection, extra);
}

std::uint64_t count_models(const Formula& f, const std::set<std::string>& over) {
    const Count c = count_models_exact(f, over);
    if (c > std::numeric_limits<std::uint64_t>::max())
        throw OverflowError("model count " + c.str() + " exceeds 64 bits; use count_models_exact");
    return static_cast<std::uint64_t>(c);
}

std::vector<Assignment> enumerate_models(const Formula& f, const std::set<std::string>& over,
                                         EnumerationLimit limit) {
    if (!limit.max && over.size() > max_unbounded_enumeration_width)
        throw CapacityError("unbounded enumeration over " + std::to_string(over.size()) + " variables");
    const CnfFormula cnf = to_cnf(f);
    auto models = Enumerator(cnf, over, limit).run();
    if (limit.max && models.size() > *limit.max) models.resize(*limit.max);
    return models;
}

} // namespace safesple::logic
