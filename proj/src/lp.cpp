#include "ponmpc/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ponmpc/errors.hpp"

namespace ponmpc {

namespace {

constexpr double kEps = 1e-9;
constexpr int kMaxIterations = 200000;

struct Reduced {
    // compact problem after substituting fixed variables and propagating
    // zero bounds; maps compact column -> original variable
    std::vector<int> cols;
    std::vector<std::vector<double>> a;  // dense rows over compact columns
    std::vector<double> b;
    std::vector<double> c;
};

// Substitute fixed variables into the rows, then fix to zero every variable
// appearing in a row whose (substituted) rhs is zero: coefficients are
// non-negative, so such rows force their support to vanish.
Reduced reduce(const LpInstance& inst, std::vector<std::int64_t>& pinned,
               std::vector<char>& is_pinned) {
    pinned.assign(static_cast<std::size_t>(inst.num_vars), 0);
    is_pinned.assign(static_cast<std::size_t>(inst.num_vars), 0);
    for (const auto& [v, val] : inst.fixed) {
        if (v < 0 || v >= inst.num_vars)
            throw DimensionMismatchError("fixed variable index out of range");
        pinned[static_cast<std::size_t>(v)] = val;
        is_pinned[static_cast<std::size_t>(v)] = 1;
    }

    std::vector<std::int64_t> rhs(inst.rows.size());
    for (std::size_t r = 0; r < inst.rows.size(); ++r) {
        const LpRow& row = inst.rows[r];
        std::int64_t b = row.rhs;
        for (std::size_t t = 0; t < row.vars.size(); ++t) {
            const int v = row.vars[t];
            if (v < 0 || v >= inst.num_vars)
                throw DimensionMismatchError("row references unknown variable");
            if (row.coefs[t] < 0)
                throw Error("lp: negative coefficients are not supported");
            if (is_pinned[static_cast<std::size_t>(v)])
                b -= static_cast<std::int64_t>(row.coefs[t]) * pinned[static_cast<std::size_t>(v)];
        }
        if (b < 0)
            throw Error("lp: fixed assignments violate row " + std::to_string(r));
        rhs[r] = b;
    }

    // zero-bound propagation
    for (std::size_t r = 0; r < inst.rows.size(); ++r) {
        if (rhs[r] != 0) continue;
        const LpRow& row = inst.rows[r];
        for (std::size_t t = 0; t < row.vars.size(); ++t) {
            const int v = row.vars[t];
            if (row.coefs[t] > 0 && !is_pinned[static_cast<std::size_t>(v)]) {
                is_pinned[static_cast<std::size_t>(v)] = 1;
                pinned[static_cast<std::size_t>(v)] = 0;
            }
        }
    }

    Reduced red;
    std::vector<int> col_of(static_cast<std::size_t>(inst.num_vars), -1);
    for (int v = 0; v < inst.num_vars; ++v) {
        if (!is_pinned[static_cast<std::size_t>(v)]) {
            col_of[static_cast<std::size_t>(v)] = static_cast<int>(red.cols.size());
            red.cols.push_back(v);
        }
    }
    const std::size_t n = red.cols.size();
    red.c.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        red.c[j] = inst.objective.empty() ? 1.0 : inst.objective[static_cast<std::size_t>(red.cols[j])];

    for (std::size_t r = 0; r < inst.rows.size(); ++r) {
        const LpRow& row = inst.rows[r];
        std::vector<double> dense(n, 0.0);
        bool any = false;
        for (std::size_t t = 0; t < row.vars.size(); ++t) {
            const int cjj = col_of[static_cast<std::size_t>(row.vars[t])];
            if (cjj >= 0 && row.coefs[t] != 0) {
                dense[static_cast<std::size_t>(cjj)] += row.coefs[t];
                any = true;
            }
        }
        if (!any) continue;  // row fully pinned; rhs already checked >= 0
        red.a.push_back(std::move(dense));
        red.b.push_back(static_cast<double>(rhs[r]));
    }
    return red;
}

} // namespace

LpRelaxedSolution solve_lp_relaxed(const LpInstance& inst) {
    std::vector<std::int64_t> pinned;
    std::vector<char> is_pinned;
    Reduced red = reduce(inst, pinned, is_pinned);

    const int m = static_cast<int>(red.a.size());
    const int n = static_cast<int>(red.cols.size());

    LpRelaxedSolution out;
    out.values.assign(static_cast<std::size_t>(inst.num_vars), 0.0);
    for (int v = 0; v < inst.num_vars; ++v)
        if (is_pinned[static_cast<std::size_t>(v)])
            out.values[static_cast<std::size_t>(v)] = static_cast<double>(pinned[static_cast<std::size_t>(v)]);

    if (n > 0 && m > 0) {
        // tableau: m rows x (n + m + 1); columns n..n+m-1 are slacks
        const int width = n + m + 1;
        std::vector<double> tab(static_cast<std::size_t>(m) * width, 0.0);
        std::vector<double> z(static_cast<std::size_t>(width), 0.0);
        std::vector<int> basis(static_cast<std::size_t>(m));
        auto T = [&](int i, int j) -> double& { return tab[static_cast<std::size_t>(i) * width + j]; };

        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) T(i, j) = red.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            T(i, n + i) = 1.0;
            T(i, width - 1) = red.b[static_cast<std::size_t>(i)];
            basis[static_cast<std::size_t>(i)] = n + i;
        }
        for (int j = 0; j < n; ++j) z[static_cast<std::size_t>(j)] = red.c[static_cast<std::size_t>(j)];

        int iter = 0;
        while (true) {
            if (++iter > kMaxIterations)
                throw IterationLimitError("simplex iteration limit reached");

            // Bland: lowest-index column with positive reduced cost
            int enter = -1;
            for (int j = 0; j < n + m; ++j) {
                if (z[static_cast<std::size_t>(j)] > kEps) { enter = j; break; }
            }
            if (enter < 0) break;

            // ratio test; ties resolved by lowest basic variable index
            int leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m; ++i) {
                const double aij = T(i, enter);
                if (aij > kEps) {
                    const double ratio = T(i, width - 1) / aij;
                    if (ratio < best - kEps ||
                        (ratio < best + kEps && (leave < 0 || basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)]))) {
                        best = ratio;
                        leave = i;
                    }
                }
            }
            if (leave < 0)
                throw Error("simplex: unbounded direction (malformed instance)");

            // pivot
            const double piv = T(leave, enter);
            for (int j = 0; j < width; ++j) T(leave, j) /= piv;
            for (int i = 0; i < m; ++i) {
                if (i == leave) continue;
                const double f = T(i, enter);
                if (std::fabs(f) < 1e-13) continue;
                for (int j = 0; j < width; ++j) T(i, j) -= f * T(leave, j);
            }
            const double fz = z[static_cast<std::size_t>(enter)];
            for (int j = 0; j < width; ++j) {
                if (j < n + m) z[static_cast<std::size_t>(j)] -= fz * T(leave, j);
            }
            basis[static_cast<std::size_t>(leave)] = enter;
        }

        for (int i = 0; i < m; ++i) {
            if (basis[static_cast<std::size_t>(i)] < n) {
                const int v = red.cols[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])];
                out.values[static_cast<std::size_t>(v)] = T(i, width - 1);
            }
        }
    }

    double obj = 0.0;
    for (int v = 0; v < inst.num_vars; ++v) {
        const double cv = inst.objective.empty() ? 1.0 : inst.objective[static_cast<std::size_t>(v)];
        if (!is_pinned[static_cast<std::size_t>(v)])
            obj += cv * out.values[static_cast<std::size_t>(v)];
    }
    out.objective = obj;
    return out;
}

LpSolution solve_lp(const LpInstance& inst) {
    const LpRelaxedSolution rel = solve_lp_relaxed(inst);

    LpSolution sol;
    sol.values.resize(static_cast<std::size_t>(inst.num_vars));
    for (int v = 0; v < inst.num_vars; ++v) {
        const double x = rel.values[static_cast<std::size_t>(v)];
        const double rounded = std::nearbyint(x);
        if (std::fabs(x - rounded) > 1e-6)
            throw NonIntegralSolutionError("solve_lp: variable " + std::to_string(v) +
                                           " is fractional (" + std::to_string(x) + ")");
        sol.values[static_cast<std::size_t>(v)] = static_cast<std::int64_t>(rounded);
    }

    // exact re-verification before releasing the allocation
    std::vector<char> is_fixed(static_cast<std::size_t>(inst.num_vars), 0);
    for (const auto& [v, val] : inst.fixed) {
        is_fixed[static_cast<std::size_t>(v)] = 1;
        if (sol.values[static_cast<std::size_t>(v)] != val)
            throw NonIntegralSolutionError("solve_lp: fixed variable drifted");
    }
    for (int v = 0; v < inst.num_vars; ++v)
        if (sol.values[static_cast<std::size_t>(v)] < 0)
            throw NonIntegralSolutionError("solve_lp: negative component after rounding");
    for (std::size_t r = 0; r < inst.rows.size(); ++r) {
        const LpRow& row = inst.rows[r];
        std::int64_t lhs = 0;
        for (std::size_t t = 0; t < row.vars.size(); ++t)
            lhs += static_cast<std::int64_t>(row.coefs[t]) * sol.values[static_cast<std::size_t>(row.vars[t])];
        if (lhs > row.rhs)
            throw NonIntegralSolutionError("solve_lp: rounded point violates row " + std::to_string(r));
    }

    std::int64_t obj = 0;
    for (int v = 0; v < inst.num_vars; ++v) {
        if (is_fixed[static_cast<std::size_t>(v)]) continue;
        const double cv = inst.objective.empty() ? 1.0 : inst.objective[static_cast<std::size_t>(v)];
        obj += static_cast<std::int64_t>(std::llround(cv)) * sol.values[static_cast<std::size_t>(v)];
    }
    sol.objective = obj;
    return sol;
}

double brute_force_search_space(const LpInstance& inst) {
    std::vector<char> is_fixed(static_cast<std::size_t>(inst.num_vars), 0);
    for (const auto& [v, val] : inst.fixed) is_fixed[static_cast<std::size_t>(v)] = 1;

    std::vector<std::int64_t> ub(static_cast<std::size_t>(inst.num_vars),
                                 std::numeric_limits<std::int64_t>::max());
    for (const LpRow& row : inst.rows) {
        std::int64_t fixed_part = 0;
        for (std::size_t t = 0; t < row.vars.size(); ++t) {
            const int v = row.vars[t];
            if (is_fixed[static_cast<std::size_t>(v)]) {
                for (const auto& [fv, fval] : inst.fixed)
                    if (fv == v) fixed_part += static_cast<std::int64_t>(row.coefs[t]) * fval;
            }
        }
        const std::int64_t avail = row.rhs - fixed_part;
        for (std::size_t t = 0; t < row.vars.size(); ++t) {
            const int v = row.vars[t];
            if (is_fixed[static_cast<std::size_t>(v)] || row.coefs[t] <= 0) continue;
            const std::int64_t cap = std::max<std::int64_t>(0, avail / row.coefs[t]);
            ub[static_cast<std::size_t>(v)] = std::min(ub[static_cast<std::size_t>(v)], cap);
        }
    }

    double space = 1.0;
    for (int v = 0; v < inst.num_vars; ++v) {
        if (is_fixed[static_cast<std::size_t>(v)]) continue;
        if (ub[static_cast<std::size_t>(v)] == std::numeric_limits<std::int64_t>::max())
            throw Error("brute_force_ilp: variable " + std::to_string(v) + " has no cap");
        space *= static_cast<double>(ub[static_cast<std::size_t>(v)] + 1);
        if (space > 1e18) return space;
    }
    return space;
}

std::int64_t brute_force_ilp(const LpInstance& inst, std::int64_t max_points) {
    const double space = brute_force_search_space(inst);
    if (space > static_cast<double>(max_points))
        throw SearchSpaceTooLargeError("brute_force_ilp: " + std::to_string(space) + " points");

    std::vector<std::int64_t> value(static_cast<std::size_t>(inst.num_vars), 0);
    std::vector<char> is_fixed(static_cast<std::size_t>(inst.num_vars), 0);
    for (const auto& [v, val] : inst.fixed) {
        value[static_cast<std::size_t>(v)] = val;
        is_fixed[static_cast<std::size_t>(v)] = 1;
    }

    // per-variable caps (same derivation as the search-space estimate)
    std::vector<std::int64_t> ub(static_cast<std::size_t>(inst.num_vars), 0);
    for (int v = 0; v < inst.num_vars; ++v)
        ub[static_cast<std::size_t>(v)] = std::numeric_limits<std::int64_t>::max();
    for (const LpRow& row : inst.rows) {
        std::int64_t fixed_part = 0;
        for (std::size_t t = 0; t < row.vars.size(); ++t)
            if (is_fixed[static_cast<std::size_t>(row.vars[t])])
                fixed_part += static_cast<std::int64_t>(row.coefs[t]) * value[static_cast<std::size_t>(row.vars[t])];
        const std::int64_t avail = row.rhs - fixed_part;
        for (std::size_t t = 0; t < row.vars.size(); ++t) {
            const int v = row.vars[t];
            if (is_fixed[static_cast<std::size_t>(v)] || row.coefs[t] <= 0) continue;
            ub[static_cast<std::size_t>(v)] =
                std::min(ub[static_cast<std::size_t>(v)], std::max<std::int64_t>(0, avail / row.coefs[t]));
        }
    }

    std::vector<int> free_vars;
    for (int v = 0; v < inst.num_vars; ++v)
        if (!is_fixed[static_cast<std::size_t>(v)]) free_vars.push_back(v);

    // incremental row evaluation: rows_of[v] lists (row, coef)
    std::vector<std::vector<std::pair<int, std::int32_t>>> rows_of(static_cast<std::size_t>(inst.num_vars));
    std::vector<std::int64_t> lhs(inst.rows.size(), 0);
    for (std::size_t r = 0; r < inst.rows.size(); ++r) {
        const LpRow& row = inst.rows[r];
        for (std::size_t t = 0; t < row.vars.size(); ++t) {
            rows_of[static_cast<std::size_t>(row.vars[t])].push_back({static_cast<int>(r), row.coefs[t]});
            lhs[r] += static_cast<std::int64_t>(row.coefs[t]) * value[static_cast<std::size_t>(row.vars[t])];
        }
    }
    int violated = 0;
    for (std::size_t r = 0; r < inst.rows.size(); ++r)
        if (lhs[r] > inst.rows[r].rhs) ++violated;
    if (violated > 0)
        throw Error("brute_force_ilp: fixed assignments are infeasible");

    double obj = 0.0;
    auto objective_of = [&](int v) {
        return inst.objective.empty() ? 1.0 : inst.objective[static_cast<std::size_t>(v)];
    };

    auto bump = [&](int v, std::int64_t delta) {
        value[static_cast<std::size_t>(v)] += delta;
        if (!is_fixed[static_cast<std::size_t>(v)]) obj += objective_of(v) * static_cast<double>(delta);
        for (const auto& [r, coef] : rows_of[static_cast<std::size_t>(v)]) {
            const bool was_bad = lhs[static_cast<std::size_t>(r)] > inst.rows[static_cast<std::size_t>(r)].rhs;
            lhs[static_cast<std::size_t>(r)] += static_cast<std::int64_t>(coef) * delta;
            const bool is_bad = lhs[static_cast<std::size_t>(r)] > inst.rows[static_cast<std::size_t>(r)].rhs;
            violated += static_cast<int>(is_bad) - static_cast<int>(was_bad);
        }
    };

    std::int64_t best = violated == 0 ? 0 : std::numeric_limits<std::int64_t>::min();
    if (violated == 0) best = static_cast<std::int64_t>(std::llround(obj));

    // odometer over the free variables
    while (true) {
        std::size_t d = 0;
        while (d < free_vars.size()) {
            const int v = free_vars[d];
            if (value[static_cast<std::size_t>(v)] < ub[static_cast<std::size_t>(v)]) {
                bump(v, 1);
                break;
            }
            bump(v, -value[static_cast<std::size_t>(v)]);
            ++d;
        }
        if (d == free_vars.size()) break;
        if (violated == 0) {
            const std::int64_t o = static_cast<std::int64_t>(std::llround(obj));
            if (o > best) best = o;
        }
    }
    if (best == std::numeric_limits<std::int64_t>::min())
        throw Error("brute_force_ilp: no feasible point found");
    return best;
}

std::string LpInstance::debug_dump() const {
    std::ostringstream os;
    os << "lp max over " << num_vars << " vars, " << rows.size() << " rows\n";
    os << "obj:";
    for (int v = 0; v < num_vars; ++v)
        os << ' ' << (objective.empty() ? 1.0 : objective[static_cast<std::size_t>(v)]);
    os << '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
        os << "r" << r << ':';
        for (std::size_t t = 0; t < rows[r].vars.size(); ++t)
            os << ' ' << rows[r].coefs[t] << "*x" << rows[r].vars[t];
        os << " <= " << rows[r].rhs << '\n';
    }
    for (const auto& [v, val] : fixed) os << "x" << v << " = " << val << '\n';
    if (!keys.empty()) {
        os << "vars:";
        for (int v = 0; v < num_vars; ++v)
            os << " x" << v << "=(c" << keys[static_cast<std::size_t>(v)].cls + 1 << ",q"
               << keys[static_cast<std::size_t>(v)].queue << ",t" << keys[static_cast<std::size_t>(v)].slot << ')';
        os << '\n';
    }
    return os.str();
}

} // namespace ponmpc
