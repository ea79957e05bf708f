#include "grazing/transport.hpp"

#include "grazing/ensemble.hpp"
#include "grazing/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

namespace grazing {

void CompensatedSum::add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

double TransportPlan::w2() const { return std::sqrt(std::max(cost, 0.0)); }

double plan_cost(std::span<const Vec3> a, std::span<const Vec3> b, std::span<const std::uint32_t> sigma) {
    CompensatedSum s;
    for (std::size_t i = 0; i < a.size(); ++i) s.add(norm2(a[i] - b[sigma[i]]));
    return a.empty() ? 0.0 : s.value() / static_cast<double>(a.size());
}

bool is_permutation(std::span<const std::uint32_t> sigma) {
    std::vector<char> seen(sigma.size(), 0);
    for (auto j : sigma) {
        if (j >= sigma.size() || seen[j]) return false;
        seen[j] = 1;
    }
    return true;
}

namespace {

void check_sizes(std::span<const Vec3> a, std::span<const Vec3> b) {
    if (a.size() != b.size()) throw DomainError("transport: particle counts differ");
    if (a.empty()) throw DomainError("transport: empty input");
}

// Dense linear assignment, minimizing sum_i cost(i, rowsol[i]).
class Lapjv {
public:
    Lapjv(std::span<const Vec3> a, std::span<const Vec3> b) : n_(a.size()), c_(n_ * n_) {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) c_[i * n_ + j] = norm2(a[i] - b[j]);
    }

    std::vector<std::uint32_t> solve();
    std::vector<std::uint32_t> solve_from(std::span<const std::uint32_t> assignment, std::span<const double> v);
    const std::vector<double>& column_potentials() const { return v_; }
    double cost(std::size_t i, std::size_t j) const { return c_[i * n_ + j]; }

private:
    void column_reduction();
    void reduction_transfer();
    void augmenting_row_reduction();
    void augment(long freerow);

    std::size_t n_;
    std::vector<double> c_;
    std::vector<double> v_;
    std::vector<long> rowsol_, colsol_;
    std::vector<long> free_;
};

void Lapjv::column_reduction() {
    std::vector<int> matches(n_, 0);
    for (long j = static_cast<long>(n_) - 1; j >= 0; --j) {
        double min = cost(0, j);
        long imin = 0;
        for (std::size_t i = 1; i < n_; ++i) {
            if (cost(i, j) < min) {
                min = cost(i, j);
                imin = static_cast<long>(i);
            }
        }
        v_[j] = min;
        if (++matches[imin] == 1) {
            rowsol_[imin] = j;
            colsol_[j] = imin;
        } else if (v_[j] < v_[rowsol_[imin]]) {
            colsol_[rowsol_[imin]] = -1;
            rowsol_[imin] = j;
            colsol_[j] = imin;
        } else {
            colsol_[j] = -1;
        }
    }
    free_.clear();
    for (std::size_t i = 0; i < n_; ++i) {
        if (matches[i] == 0) free_.push_back(static_cast<long>(i));
    }
}

void Lapjv::reduction_transfer() {
    std::vector<char> is_free(n_, 0);
    for (long i : free_) is_free[i] = 1;
    for (std::size_t i = 0; i < n_; ++i) {
        if (is_free[i] || rowsol_[i] < 0) continue;
        const long j1 = rowsol_[i];
        double min = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n_; ++j)
            if (static_cast<long>(j) != j1) min = std::min(min, cost(i, j) - v_[j]);
        if (std::isfinite(min)) v_[j1] -= min - (cost(i, j1) - v_[j1]);
    }
    // Rows that lost their column to a second, cheaper column in the
    // reduction are unassigned as well.
    free_.clear();
    for (std::size_t i = 0; i < n_; ++i)
        if (rowsol_[i] < 0) free_.push_back(static_cast<long>(i));
}

void Lapjv::augmenting_row_reduction() {
    const double inf = std::numeric_limits<double>::infinity();
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<long> todo = std::move(free_);
        free_.clear();
        std::size_t k = 0;
        std::size_t budget = 4 * n_ + 16;
        while (k < todo.size()) {
            const long i = todo[k++];
            double umin = cost(i, 0) - v_[0];
            double usubmin = inf;
            long j1 = 0, j2 = -1;
            for (std::size_t j = 1; j < n_; ++j) {
                const double h = cost(i, j) - v_[j];
                if (h < usubmin) {
                    if (h >= umin) {
                        usubmin = h;
                        j2 = static_cast<long>(j);
                    } else {
                        usubmin = umin;
                        umin = h;
                        j2 = j1;
                        j1 = static_cast<long>(j);
                    }
                }
            }
            long i0 = colsol_[j1];
            const bool strict = umin < usubmin;
            if (strict)
                v_[j1] -= usubmin - umin;
            else if (i0 >= 0 && j2 >= 0) {
                j1 = j2;
                i0 = colsol_[j2];
            }
            if (rowsol_[i] >= 0) colsol_[rowsol_[i]] = -1;
            rowsol_[i] = j1;
            colsol_[j1] = i;
            if (i0 >= 0) {
                rowsol_[i0] = -1;
                if (strict && budget > 0) {
                    --budget;
                    todo[--k] = i0;
                } else {
                    free_.push_back(i0);
                }
            }
        }
    }
}

void Lapjv::augment(long freerow) {
    const std::size_t n = n_;
    std::vector<double> d(n);
    std::vector<long> pred(n, freerow);
    std::vector<std::size_t> collist(n);
    for (std::size_t j = 0; j < n; ++j) {
        d[j] = cost(freerow, j) - v_[j];
        collist[j] = j;
    }
    std::size_t low = 0, up = 0;
    long last = -1;
    long endofpath = -1;
    double min = 0.0;
    bool found = false;
    while (!found) {
        if (up == low) {
            last = static_cast<long>(low) - 1;
            min = d[collist[up++]];
            for (std::size_t k = up; k < n; ++k) {
                const std::size_t j = collist[k];
                const double h = d[j];
                if (h <= min) {
                    if (h < min) {
                        up = low;
                        min = h;
                    }
                    collist[k] = collist[up];
                    collist[up++] = j;
                }
            }
            for (std::size_t k = low; k < up; ++k) {
                if (colsol_[collist[k]] < 0) {
                    endofpath = static_cast<long>(collist[k]);
                    found = true;
                    break;
                }
            }
        }
        if (!found) {
            const std::size_t j1 = collist[low++];
            const long i = colsol_[j1];
            const double h = cost(i, j1) - v_[j1] - min;
            for (std::size_t k = up; k < n; ++k) {
                const std::size_t j = collist[k];
                const double v2 = cost(i, j) - v_[j] - h;
                if (v2 < d[j]) {
                    pred[j] = i;
                    if (v2 == min) {
                        if (colsol_[j] < 0) {
                            endofpath = static_cast<long>(j);
                            found = true;
                            break;
                        }
                        collist[k] = collist[up];
                        collist[up++] = j;
                    }
                    d[j] = v2;
                }
            }
        }
    }
    for (long k = 0; k <= last; ++k) {
        const std::size_t j1 = collist[k];
        v_[j1] += d[j1] - min;
    }
    long i;
    do {
        i = pred[endofpath];
        colsol_[endofpath] = i;
        const long j1 = endofpath;
        endofpath = rowsol_[i];
        rowsol_[i] = j1;
    } while (i != freerow);
}

std::vector<std::uint32_t> Lapjv::solve() {
    v_.assign(n_, 0.0);
    rowsol_.assign(n_, -1);
    colsol_.assign(n_, -1);
    std::vector<std::uint32_t> out(n_);
    if (n_ == 1) {
        out[0] = 0;
        return out;
    }
    column_reduction();
    reduction_transfer();
    augmenting_row_reduction();
    for (long f : std::vector<long>(free_)) augment(f);
    for (std::size_t i = 0; i < n_; ++i) out[i] = static_cast<std::uint32_t>(rowsol_[i]);
    return out;
}

std::vector<std::uint32_t> Lapjv::solve_from(std::span<const std::uint32_t> assignment, std::span<const double> v) {
    v_.assign(v.begin(), v.end());
    rowsol_.assign(n_, -1);
    colsol_.assign(n_, -1);
    free_.clear();
    for (std::size_t i = 0; i < n_; ++i) {
        double umin = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n_; ++j) umin = std::min(umin, cost(i, j) - v_[j]);
        const std::size_t j = assignment[i];
        if (cost(i, j) - v_[j] <= umin) {
            rowsol_[i] = static_cast<long>(j);
            colsol_[j] = static_cast<long>(i);
        } else {
            free_.push_back(static_cast<long>(i));
        }
    }
    augmenting_row_reduction();
    for (long f : std::vector<long>(free_)) augment(f);
    std::vector<std::uint32_t> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = static_cast<std::uint32_t>(rowsol_[i]);
    return out;
}

// Certificate: u_i = min_j (c_ij - v_j) makes (u, v) dual feasible, so
// sum(u) + sum(v) is a lower bound on every assignment cost.
TransportPlan finish(const Lapjv& solver, std::span<const Vec3> a, std::span<const Vec3> b,
                     std::vector<std::uint32_t> assignment) {
    TransportPlan plan;
    plan.assignment = std::move(assignment);
    if (!is_permutation(plan.assignment)) throw NumericalError("w2_exact: solver returned a non-bijection");
    plan.cost = plan_cost(a, b, plan.assignment);
    const auto& v = solver.column_potentials();
    const std::size_t n = a.size();
    CompensatedSum dual;
    for (std::size_t j = 0; j < n; ++j) dual.add(v[j]);
    for (std::size_t i = 0; i < n; ++i) {
        double u = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) u = std::min(u, solver.cost(i, j) - v[j]);
        dual.add(u);
    }
    plan.dual_gap = std::max(0.0, plan.cost - dual.value() / static_cast<double>(n));
    plan.potentials = v;
    return plan;
}

}  // namespace

TransportPlan w2_exact(std::span<const Vec3> a, std::span<const Vec3> b, std::size_t cap) {
    check_sizes(a, b);
    if (a.size() > cap) throw DomainError("w2_exact: N exceeds solver cap");
    Lapjv solver(a, b);
    return finish(solver, a, b, solver.solve());
}

TransportPlan w2_exact_warm(std::span<const Vec3> a, std::span<const Vec3> b, const TransportPlan& previous,
                            std::size_t cap) {
    check_sizes(a, b);
    if (a.size() > cap) throw DomainError("w2_exact: N exceeds solver cap");
    if (previous.potentials.size() != a.size() || previous.assignment.size() != a.size())
        return w2_exact(a, b, cap);
    if (!is_permutation(previous.assignment)) throw DomainError("w2_exact_warm: previous plan is not a bijection");
    if (a.size() == 1) return w2_exact(a, b, cap);
    Lapjv solver(a, b);
    return finish(solver, a, b, solver.solve_from(previous.assignment, previous.potentials));
}

TransportPlan w2_exact(const Ensemble& a, const Ensemble& b, std::size_t cap) {
    return w2_exact(std::span<const Vec3>(a.velocities), std::span<const Vec3>(b.velocities), cap);
}

TransportPlan w2_bruteforce(std::span<const Vec3> a, std::span<const Vec3> b) {
    check_sizes(a, b);
    if (a.size() > 8) throw DomainError("w2_bruteforce: N > 8");
    std::vector<std::uint32_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0u);
    TransportPlan best;
    best.cost = std::numeric_limits<double>::infinity();
    do {
        const double c = plan_cost(a, b, perm);
        if (c < best.cost) {
            best.cost = c;
            best.assignment = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

void write_plan(std::ostream& os, std::span<const Vec3> a, std::span<const Vec3> b, const TransportPlan& plan) {
    os << "i,sigma_i,pair_cost\n" << std::setprecision(17);
    for (std::size_t i = 0; i < plan.assignment.size(); ++i)
        os << i << ',' << plan.assignment[i] << ',' << norm2(a[i] - b[plan.assignment[i]]) << '\n';
}

}  // namespace grazing
