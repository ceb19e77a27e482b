/**
 * @file elliptic.hpp
 * @brief Inverses R0, R1 of (1 - delta^2 dxx) on the exterior segments with
 *        Dirichlet/Neumann contact data, the exponential boundary layer, and
 *        the boundary trace operators (I, D_k, S_k, P_k) together with their
 *        exchange identities.
 *
 * Discretization: 3-point second differences, prefactored tridiagonal
 * systems (one Dirichlet, one Neumann variant, shared by both segments via
 * mirror symmetry). The far-field end at +-L always carries homogeneous
 * Dirichlet data; the induced truncation error is O(exp(-(L-R)/delta)).
 */

#pragma once

#include "bfloat/core.hpp"

namespace bfloat {

namespace detail {

/// Prefactored tridiagonal LU (Thomas), no pivoting; the Helmholtz systems
/// are strictly diagonally dominant.
class Tridiag {
public:
    Tridiag() = default;
    Tridiag(std::vector<Real> sub, std::vector<Real> diag, std::vector<Real> sup)
        : sub_(std::move(sub)), inv_diag_(std::move(diag)), sup_(std::move(sup)) {
        const std::size_t n = inv_diag_.size();
        for (std::size_t i = 1; i < n; ++i) {
            sub_[i] /= inv_diag_[i - 1];
            inv_diag_[i] -= sub_[i] * sup_[i - 1];
        }
        for (auto& d : inv_diag_) d = 1.0 / d;
    }

    void solve(std::vector<Real>& rhs) const {
        const std::size_t n = inv_diag_.size();
        for (std::size_t i = 1; i < n; ++i) rhs[i] -= sub_[i] * rhs[i - 1];
        rhs[n - 1] *= inv_diag_[n - 1];
        for (std::size_t i = n - 1; i-- > 0;)
            rhs[i] = (rhs[i] - sup_[i] * rhs[i + 1]) * inv_diag_[i];
    }

private:
    std::vector<Real> sub_, inv_diag_, sup_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Helmholtz solver
// ---------------------------------------------------------------------------

/**
 * Prefactored solver for (1 - delta^2 dxx) u = f on each exterior segment.
 *
 * R0: u = 0 at the contact point and at the far end.
 * R1: dx u = 0 at the contact point (ghost-node elimination, second order),
 *     u = 0 at the far end.
 *
 * Factorizations are built once; solves are O(n) and the object is safe for
 * concurrent use afterwards.
 */
class HelmholtzSolver {
public:
    HelmholtzSolver(const GridSpec& grid, Real delta) : grid_(grid), delta_(delta) {
        if (!(delta > 0.0))
            throw Error("HelmholtzSolver: delta must be positive (hyperbolic path is separate)");
        const int n = grid.n_per_side;
        if (n < 4) throw Error("HelmholtzSolver: need at least 4 nodes per side");
        const Real r = delta * delta / (grid.dx * grid.dx);

        // Dirichlet variant: unknowns are the n-2 interior nodes.
        {
            std::vector<Real> sub(n - 2, -r), diag(n - 2, 1.0 + 2.0 * r), sup(n - 2, -r);
            dirichlet_ = detail::Tridiag(std::move(sub), std::move(diag), std::move(sup));
        }
        // Neumann variant (contact node first): unknowns are nodes 0..n-2 of
        // the boundary-ordered segment; row 0 encodes the eliminated ghost.
        {
            std::vector<Real> sub(n - 1, -r), diag(n - 1, 1.0 + 2.0 * r), sup(n - 1, -r);
            sup[0] = -2.0 * r;
            neumann_ = detail::Tridiag(std::move(sub), std::move(diag), std::move(sup));
        }
    }

    const GridSpec& grid() const { return grid_; }
    Real delta() const { return delta_; }

    /// Size of the far-field truncation error committed by the +-L closure.
    Real far_field_truncation() const {
        return std::exp(-(grid_.L - grid_.R) / delta_);
    }

    /// u = R0 f: homogeneous Dirichlet at the contact points and at +-L.
    ExteriorField solve_R0(const ExteriorField& f) const {
        require_grid(f);
        ExteriorField u(grid_);
        const int n = grid_.n_per_side;
        std::vector<Real> rhs(n - 2);
        for (Side s : {Side::minus, Side::plus}) {
            const auto& fv = f.values(s);
            for (int i = 0; i < n - 2; ++i) rhs[i] = fv[i + 1];
            dirichlet_.solve(rhs);
            auto& uv = u.values(s);
            uv.front() = 0.0;
            uv.back() = 0.0;
            for (int i = 0; i < n - 2; ++i) uv[i + 1] = rhs[i];
        }
        return u;
    }

    /// u = R1 f: homogeneous Neumann at the contact points, Dirichlet at +-L.
    ExteriorField solve_R1(const ExteriorField& f) const {
        require_grid(f);
        ExteriorField u(grid_);
        const int n = grid_.n_per_side;
        std::vector<Real> rhs(n - 1);
        for (Side s : {Side::minus, Side::plus}) {
            for (int i = 0; i < n - 1; ++i) rhs[i] = f.from_boundary(s, i);
            neumann_.solve(rhs);
            for (int i = 0; i < n - 1; ++i) u.from_boundary(s, i) = rhs[i];
            u.from_boundary(s, n - 1) = 0.0;
        }
        return u;
    }

private:
    void require_grid(const ExteriorField& f) const {
        if (!(f.grid() == grid_)) throw Error("HelmholtzSolver: field grid mismatch");
    }

    GridSpec grid_;
    Real delta_;
    detail::Tridiag dirichlet_, neumann_;
};

/// Discrete (1 - delta^2 dxx) with 3-point interior stencils and 4-point
/// one-sided second differences at segment ends. Used by tests to verify the
/// inverse property and by the time-oscillation diagnostic.
inline ExteriorField apply_helmholtz(const ExteriorField& u, Real delta) {
    ExteriorField out(u.grid());
    const Real dx2 = u.grid().dx * u.grid().dx;
    const Real r = delta * delta / dx2;
    for (Side s : {Side::minus, Side::plus}) {
        const auto& v = u.values(s);
        auto& o = out.values(s);
        const int n = static_cast<int>(v.size());
        if (n < 4) throw Error("apply_helmholtz: segment too short");
        o[0] = v[0] - r * (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]);
        for (int i = 1; i < n - 1; ++i)
            o[i] = v[i] - r * (v[i - 1] - 2.0 * v[i] + v[i + 1]);
        o[n - 1] = v[n - 1] - r * (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]);
    }
    return out;
}

/// sigma * exp(-|x|_R / delta).
inline ExteriorField boundary_layer(Real sigma, Real delta, const GridSpec& grid) {
    if (!(delta > 0.0)) throw Error("boundary_layer: delta must be positive");
    ExteriorField out(grid);
    for (int i = 0; i < grid.n_per_side; ++i) {
        const Real v = sigma * std::exp(-(i * grid.dx) / delta);
        out.from_boundary(Side::minus, i) = v;
        out.from_boundary(Side::plus, i) = v;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Trace machinery
// ---------------------------------------------------------------------------

/**
 * One-sided boundary Taylor data of a field: entry l holds (delta*dx)^l f at
 * the contact point, l = 0..k_max. Derivatives come from one-sided Fornberg
 * stencils of order max(2, k_max - l), so the delta-scaling of compatibility
 * residuals is not swamped by difference errors.
 */
class TraceSet {
public:
    TraceSet(const ExteriorField& f, Side side, int k_max, Real delta)
        : side_(side), delta_(delta), derivs_(static_cast<std::size_t>(k_max) + 1) {
        const GridSpec& g = f.grid();
        derivs_[0] = f.trace(side);
        for (int l = 1; l <= k_max; ++l) {
            const int order = std::max(2, k_max - l);
            const int npts = l + order;
            if (npts > g.n_per_side)
                throw Error("TraceSet: derivative order exceeds stencil capability");
            std::vector<Real> xs(npts);
            for (int i = 0; i < npts; ++i) xs[i] = i * g.dx;
            const auto w = detail::fd_weights(0.0, xs, l);
            Real acc = 0.0;
            for (int i = 0; i < npts; ++i) acc += w[i] * f.from_boundary(side, i);
            // boundary-ordered nodes run outward: on E- that is the -x direction
            if (side == Side::minus && l % 2 == 1) acc = -acc;
            derivs_[l] = acc;
        }
    }

    Side side() const { return side_; }
    int k_max() const { return static_cast<int>(derivs_.size()) - 1; }

    /// (delta*dx)^l f at the contact point.
    Real entry(int l) const { return derivs_.at(l) * std::pow(delta_, l); }

    /// Plain one-sided derivative trace dx^l f.
    Real derivative_trace(int l) const { return derivs_.at(l); }

    /// D_k = sum of even entries below k.
    Real D(int k) const {
        Real acc = 0.0;
        for (int l = 0; 2 * l < k; ++l) acc += entry(2 * l);
        return acc;
    }

    /// S_k = sum_{l<k} (+-1)^l entry(l); the sign is the side.
    Real S(int k) const {
        const Real sgn = side_ == Side::plus ? 1.0 : -1.0;
        Real acc = 0.0, p = 1.0;
        for (int l = 0; l < k; ++l, p *= sgn) acc += p * entry(l);
        return acc;
    }

    /// P_k = S_k - D_k: the signed odd entries below k.
    Real P(int k) const {
        const Real sgn = side_ == Side::plus ? 1.0 : -1.0;
        Real acc = 0.0;
        for (int l = 0; 2 * l + 1 < k; ++l) acc += sgn * entry(2 * l + 1);
        return acc;
    }

private:
    Side side_;
    Real delta_;
    std::vector<Real> derivs_;
};

inline Real trace_D(const ExteriorField& f, int k, Side side, Real delta) {
    if (k < 1) throw Error("trace_D: k must be >= 1");
    return TraceSet(f, side, k - 1 < 1 ? 1 : k - 1, delta).D(k);
}

inline Real trace_S(const ExteriorField& f, int k, Side side, Real delta) {
    if (k < 1) throw Error("trace_S: k must be >= 1");
    return TraceSet(f, side, k - 1 < 1 ? 1 : k - 1, delta).S(k);
}

inline Real trace_P(const ExteriorField& f, int k, Side side, Real delta) {
    if (k < 1) throw Error("trace_P: k must be >= 1");
    return TraceSet(f, side, k - 1 < 1 ? 1 : k - 1, delta).P(k);
}

/**
 * Nonlocal trace I(f) = delta^-1 int e^(-|y|_R/delta) f(y) dy over one
 * segment. The exponential weight is integrated exactly against the
 * piecewise-linear interpolant of f, which keeps the quadrature uniformly
 * accurate in delta even when dx ~ delta.
 */
inline Real trace_I(const ExteriorField& f, Side side, Real delta) {
    if (!(delta > 0.0)) throw Error("trace_I: delta must be positive");
    const GridSpec& g = f.grid();
    const Real dx = g.dx;
    Real acc = 0.0;
    Real E0 = 1.0;  // exp(-s_i/delta) at the cell's inner edge
    for (int i = 0; i + 1 < g.n_per_side; ++i) {
        const Real E1 = std::exp(-((i + 1) * dx) / delta);
        const Real f0 = f.from_boundary(side, i);
        const Real f1 = f.from_boundary(side, i + 1);
        const Real dE = E0 - E1;
        // delta^-1 int e^(-s/d) [f0 + (f1-f0)(s-s0)/dx] ds over the cell
        acc += f0 * dE + (f1 - f0) * (delta * dE - dx * E1) / dx;
        E0 = E1;
    }
    return acc;
}

/// Max-norm defect of the first exchange identity
/// dx R0 f = R1 dx f +- delta^-1 f(+-R) e^(-|x|_R/delta) on each segment.
/// The identity describes the contact-point structure; the zone within
/// 12 delta of the far truncation end is excluded, where the imposed
/// Dirichlet data at +-L adds its own exponentially localized correction.
inline Real derivative_identity_residual(const ExteriorField& f, const HelmholtzSolver& helm) {
    const Real delta = helm.delta();
    ExteriorField lhs = derivative(helm.solve_R0(f));
    ExteriorField rhs = helm.solve_R1(derivative(f));
    const GridSpec& g = f.grid();
    const int n_skip = static_cast<int>(std::ceil(12.0 * delta / g.dx));
    const int i_end = std::max(1, g.n_per_side - n_skip);
    Real worst = 0.0;
    for (Side s : {Side::minus, Side::plus}) {
        const Real sgn = s == Side::plus ? 1.0 : -1.0;
        const Real c = sgn * f.trace(s) / delta;
        for (int i = 0; i < i_end; ++i) {
            const Real layer = c * std::exp(-(i * g.dx) / delta);
            worst = std::max(worst,
                             std::abs(lhs.from_boundary(s, i) - rhs.from_boundary(s, i) - layer));
        }
    }
    return worst;
}

/// Trace residuals controlling R(f,rho):
///   A = [[D_k f]],  B = alpha <D_k f> - 2 delta <P_k f> - rho.
inline std::pair<Real, Real> residual_AB(const ExteriorField& f, Real rho, int k,
                                         const Parameters& p) {
    if (k < 1) throw Error("residual_AB: k must be >= 1");
    const int k_max = std::max(1, k - 1);
    TraceSet plus(f, Side::plus, k_max, p.delta);
    TraceSet minus(f, Side::minus, k_max, p.delta);
    const Real A = plus.D(k) - minus.D(k);
    const Real B = p.alpha * 0.5 * (plus.D(k) + minus.D(k)) -
                   2.0 * p.delta * 0.5 * (plus.P(k) + minus.P(k)) - rho;
    return {A, B};
}

/// Field-level counterparts: A~ = [[q]], B~ = alpha <q> - 2 delta^2 [[dx q]] - rho.
inline std::pair<Real, Real> residual_AB_tilde(const ExteriorField& q, Real rho,
                                               Real alpha, Real delta) {
    ExteriorField dq = derivative(q);
    const Real A = jump(q);
    const Real B = alpha * average(q) - 2.0 * delta * delta * jump(dq) - rho;
    return {A, B};
}

}  // namespace bfloat
