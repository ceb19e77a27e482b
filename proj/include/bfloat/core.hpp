/**
 * @file core.hpp
 * @brief Scenario parameters, exterior grid, fields and the theta <-> zeta
 *        change of variables shared by every other module.
 *
 * The fluid occupies the two exterior half-lines E- = (-inf,-R) and
 * E+ = (R,inf), truncated here to [-L,-R] and [R,L]. All fields live on the
 * two segments; the obstacle sits over the interior (-R,R) and enters only
 * through its bottom profile zeta_w and the constant alpha = int 1/h_w.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace bfloat {

using Real = double;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Configuration / input validation problems (CLI exit code 2).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// The continuation criterion tripped: 1 + eps*c'(theta) lost positivity or
/// the sup-norm monitor crossed its ceiling. Carries the time of the event.
class BlowupSignal : public Error {
public:
    BlowupSignal(const std::string& msg, Real t) : Error(msg), time(t) {}
    Real time = 0.0;
};

// ---------------------------------------------------------------------------
// Scalar maps
// ---------------------------------------------------------------------------

/// Distance to the obstacle: |x|_R = x-R for x>R, -x-R for x<-R.
inline Real abs_R(Real x, Real R) {
    if (x > R) return x - R;
    if (x < -R) return -x - R;
    throw Error("abs_R: point lies inside the obstacle footprint [-R,R]");
}

/// theta = zeta + eps*zeta^2/2.
inline Real zeta_to_theta(Real zeta, Real eps) {
    return zeta + 0.5 * eps * zeta * zeta;
}

/// c(theta) = -2 theta^2 / (1 + sqrt(1+2 eps theta))^2, so that
/// zeta = theta + eps*c(theta) inverts zeta -> theta exactly.
inline Real c_of_theta(Real theta, Real eps) {
    const Real disc = 1.0 + 2.0 * eps * theta;
    if (disc < 0.0)
        throw Error("c_of_theta: 1+2*eps*theta < 0 (change of variables degenerates)");
    const Real s = 1.0 + std::sqrt(disc);
    return -2.0 * theta * theta / (s * s);
}

/// Branch with zeta -> theta as eps -> 0.
inline Real theta_to_zeta(Real theta, Real eps) {
    const Real disc = 1.0 + 2.0 * eps * theta;
    if (disc < 0.0)
        throw Error("theta_to_zeta: 1+2*eps*theta < 0 (change of variables degenerates)");
    return 2.0 * theta / (1.0 + std::sqrt(disc));
}

/// c'(theta) = -2 theta / (sqrt(1+2 eps theta) (1 + sqrt(1+2 eps theta))).
/// Equivalent to (1/sqrt(1+2 eps theta) - 1)/eps but free of the 0/0 at
/// eps = 0 and of cancellation near theta = 0.
inline Real c_prime_of_theta(Real theta, Real eps) {
    const Real disc = 1.0 + 2.0 * eps * theta;
    if (disc <= 0.0)
        throw Error("c_prime_of_theta: 1+2*eps*theta <= 0");
    const Real rt = std::sqrt(disc);
    return -2.0 * theta / (rt * (1.0 + rt));
}

/// 1 + eps*c'(theta) = 1/sqrt(1+2 eps theta); the coefficient in front of
/// dt(theta) and the quantity whose positivity controls continuation.
inline Real one_plus_eps_cprime(Real theta, Real eps) {
    const Real disc = 1.0 + 2.0 * eps * theta;
    if (disc <= 0.0)
        throw Error("one_plus_eps_cprime: 1+2*eps*theta <= 0");
    return 1.0 / std::sqrt(disc);
}

namespace detail {

/// Composite Simpson on [a,b] with an odd number of nodes.
template <class F>
Real simpson(F&& f, Real a, Real b, int nodes) {
    if (nodes < 3 || nodes % 2 == 0)
        throw Error("simpson: node count must be odd and >= 3");
    const Real h = (b - a) / (nodes - 1);
    Real acc = f(a) + f(b);
    for (int i = 1; i < nodes - 1; ++i)
        acc += f(a + i * h) * ((i % 2 == 1) ? 4.0 : 2.0);
    return acc * h / 3.0;
}

/// Natural cubic spline through (x_i, y_i), x strictly increasing.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<Real> x, std::vector<Real> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n)
            throw ConfigError("table profile needs >= 2 matching x/value pairs");
        for (std::size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1]))
                throw ConfigError("table profile abscissae must be strictly increasing");
        m_.assign(n, 0.0);
        if (n == 2) return;
        // Second derivatives from the standard tridiagonal system.
        std::vector<Real> diag(n, 0.0), rhs(n, 0.0), sub(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const Real hl = x_[i] - x_[i - 1], hr = x_[i + 1] - x_[i];
            sub[i] = hl;
            diag[i] = 2.0 * (hl + hr);
            rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl);
        }
        for (std::size_t i = 2; i + 1 < n; ++i) {
            const Real w = sub[i] / diag[i - 1];
            diag[i] -= w * (x_[i] - x_[i - 1]);
            rhs[i] -= w * rhs[i - 1];
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            const Real up = (i + 2 < n) ? (x_[i + 1] - x_[i]) * m_[i + 1] : 0.0;
            m_[i] = (rhs[i] - up) / diag[i];
            if (i == 1) break;
        }
    }

    Real operator()(Real x) const {
        const std::size_t n = x_.size();
        std::size_t i = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin();
        i = std::min(std::max<std::size_t>(i, 1), n - 1) - 1;
        const Real h = x_[i + 1] - x_[i];
        const Real a = (x_[i + 1] - x) / h, b = (x - x_[i]) / h;
        return a * y_[i] + b * y_[i + 1] +
               ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
    }

private:
    std::vector<Real> x_, y_;
    std::vector<Real> m_;  // second derivatives at the knots
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Obstacle profile
// ---------------------------------------------------------------------------

/// Bottom profile zeta_w of the obstacle on [-R,R]. Three config forms:
/// a constant, a polynomial in x, or a table with cubic interpolation.
class ObstacleProfile {
public:
    static ObstacleProfile flat(Real value) {
        ObstacleProfile p;
        p.kind_ = Kind::Flat;
        p.constant_ = value;
        return p;
    }

    static ObstacleProfile poly(std::vector<Real> coeffs) {
        ObstacleProfile p;
        p.kind_ = Kind::Poly;
        p.coeffs_ = std::move(coeffs);
        return p;
    }

    static ObstacleProfile table(std::vector<Real> x, std::vector<Real> value) {
        ObstacleProfile p;
        p.kind_ = Kind::Table;
        p.spline_ = detail::CubicSpline(std::move(x), std::move(value));
        return p;
    }

    Real operator()(Real x) const {
        switch (kind_) {
            case Kind::Flat: return constant_;
            case Kind::Poly: {
                Real acc = 0.0;
                for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * x + coeffs_[i];
                return acc;
            }
            case Kind::Table: return spline_(x);
        }
        return 0.0;
    }

private:
    enum class Kind { Flat, Poly, Table };
    Kind kind_ = Kind::Flat;
    Real constant_ = 0.0;
    std::vector<Real> coeffs_;
    detail::CubicSpline spline_;
};

/// alpha = int_{-R}^{R} dx / (1 + eps*zeta_w). Composite Simpson, 201 nodes
/// by default. Throws if the wetted depth under the obstacle drops below
/// h_min anywhere on the quadrature grid.
inline Real alpha_from_obstacle(const ObstacleProfile& zeta_w, Real eps, Real R,
                                Real h_min = 0.1, int nodes = 201) {
    auto integrand = [&](Real x) {
        const Real hw = 1.0 + eps * zeta_w(x);
        if (hw < h_min)
            throw Error("alpha_from_obstacle: obstacle touches bottom (h_w < h_min)");
        return 1.0 / hw;
    };
    return detail::simpson(integrand, -R, R, nodes);
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

/// Physical/dispersion constants for one scenario. delta^2 = mu/3 is kept
/// exact by construction: supply either mu or delta, the other is derived.
struct Parameters {
    Real epsilon = 0.0;  // amplitude ratio, in [0,1]
    Real mu = 0.0;       // shallowness parameter
    Real delta = 0.0;    // dispersion length, delta = sqrt(mu/3)
    Real R = 1.0;        // obstacle half-width
    ObstacleProfile zeta_w = ObstacleProfile::flat(0.0);
    Real alpha = 2.0;    // cached int_{-R}^{R} 1/h_w
    Real h_min = 0.1;

    static Parameters from_delta(Real eps, Real delta, Real R,
                                 ObstacleProfile profile = ObstacleProfile::flat(0.0),
                                 Real h_min = 0.1) {
        if (eps < 0.0 || eps > 1.0) throw ConfigError("epsilon must lie in [0,1]");
        if (delta < 0.0 || delta > 1.0) throw ConfigError("delta must lie in [0,1]");
        if (!(R > 0.0)) throw ConfigError("R must be positive");
        Parameters p;
        p.epsilon = eps;
        p.delta = delta;
        p.mu = 3.0 * delta * delta;
        p.R = R;
        p.zeta_w = std::move(profile);
        p.h_min = h_min;
        p.alpha = alpha_from_obstacle(p.zeta_w, eps, R, h_min);
        if (!(p.alpha > 0.0)) throw ConfigError("alpha must be positive");
        return p;
    }

    static Parameters from_mu(Real eps, Real mu, Real R,
                              ObstacleProfile profile = ObstacleProfile::flat(0.0),
                              Real h_min = 0.1) {
        return from_delta(eps, std::sqrt(mu / 3.0), R, std::move(profile), h_min);
    }
};

// ---------------------------------------------------------------------------
// Grid and fields
// ---------------------------------------------------------------------------

enum class Side { minus, plus };

/// Uniform grid on the truncated exterior: n nodes on [-L,-R] and n nodes on
/// [R,L], both segments including their endpoints.
struct GridSpec {
    Real R = 1.0;
    Real L = 10.0;
    int n_per_side = 0;
    Real dx = 0.0;

    GridSpec() = default;
    GridSpec(Real R_, Real L_, int n) : R(R_), L(L_), n_per_side(n) {
        if (!(L > R)) throw ConfigError("grid: L must exceed R");
        if (n < 2) throw ConfigError("grid: need at least 2 nodes per side");
        dx = (L - R) / (n - 1);
    }

    /// x-coordinate; on the left segment index 0 is -L, on the right it is +R.
    Real x(Side s, int i) const {
        return s == Side::minus ? -L + i * dx : R + i * dx;
    }

    bool operator==(const GridSpec& o) const {
        return R == o.R && L == o.L && n_per_side == o.n_per_side;
    }
};

/// Boundary-layer resolution rule dx <= delta/4. Runs may override it
/// explicitly (coarse-grid diagnostics); the default path enforces it.
inline GridSpec make_grid(Real R, Real L, int n_per_side, Real delta,
                          bool allow_coarse = false) {
    GridSpec g(R, L, n_per_side);
    if (delta > 0.0 && !allow_coarse && g.dx > delta / 4.0 + 1e-14)
        throw ConfigError("grid: dx exceeds delta/4; refine or set allow_coarse");
    return g;
}

/// A scalar function sampled on the two exterior segments. Value semantics;
/// the trace at +-R is the stored endpoint node (the grid contains the
/// boundary nodes, no extrapolation happens anywhere).
class ExteriorField {
public:
    ExteriorField() = default;
    explicit ExteriorField(const GridSpec& g)
        : grid_(g),
          left_(static_cast<std::size_t>(g.n_per_side), 0.0),
          right_(static_cast<std::size_t>(g.n_per_side), 0.0) {}

    template <class F>
    static ExteriorField sample(const GridSpec& g, F&& f) {
        ExteriorField out(g);
        for (int i = 0; i < g.n_per_side; ++i) {
            out.left_[i] = f(g.x(Side::minus, i));
            out.right_[i] = f(g.x(Side::plus, i));
        }
        return out;
    }

    const GridSpec& grid() const { return grid_; }
    int n() const { return grid_.n_per_side; }

    std::vector<Real>& values(Side s) { return s == Side::minus ? left_ : right_; }
    const std::vector<Real>& values(Side s) const {
        return s == Side::minus ? left_ : right_;
    }

    /// Node i counted outward from the contact point on the given side
    /// (i = 0 is the node at -R or +R).
    Real from_boundary(Side s, int i) const {
        return s == Side::minus ? left_[grid_.n_per_side - 1 - i] : right_[i];
    }
    Real& from_boundary(Side s, int i) {
        return s == Side::minus ? left_[grid_.n_per_side - 1 - i] : right_[i];
    }

    Real trace(Side s) const {
        return s == Side::minus ? left_.back() : right_.front();
    }

    ExteriorField& operator+=(const ExteriorField& o) {
        check_same_grid(o);
        for (std::size_t i = 0; i < left_.size(); ++i) left_[i] += o.left_[i];
        for (std::size_t i = 0; i < right_.size(); ++i) right_[i] += o.right_[i];
        return *this;
    }
    ExteriorField& operator*=(Real a) {
        for (auto& v : left_) v *= a;
        for (auto& v : right_) v *= a;
        return *this;
    }
    ExteriorField& axpy(Real a, const ExteriorField& o) {
        check_same_grid(o);
        for (std::size_t i = 0; i < left_.size(); ++i) left_[i] += a * o.left_[i];
        for (std::size_t i = 0; i < right_.size(); ++i) right_[i] += a * o.right_[i];
        return *this;
    }

    Real max_abs() const {
        Real m = 0.0;
        for (Real v : left_) m = std::max(m, std::abs(v));
        for (Real v : right_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    void check_same_grid(const ExteriorField& o) const {
        if (!(grid_ == o.grid_)) throw Error("field arithmetic on mismatched grids");
    }

    GridSpec grid_;
    std::vector<Real> left_, right_;
};

inline Real jump(const ExteriorField& f) {
    return f.trace(Side::plus) - f.trace(Side::minus);
}

inline Real average(const ExteriorField& f) {
    return 0.5 * (f.trace(Side::plus) + f.trace(Side::minus));
}

// ---------------------------------------------------------------------------
// Discrete calculus
// ---------------------------------------------------------------------------

namespace detail {

/// Fornberg weights: d-th derivative at x0 from nodes xs (any layout).
/// Classic recursion; exact for polynomials up to degree xs.size()-1.
inline std::vector<Real> fd_weights(Real x0, const std::vector<Real>& xs, int d) {
    const int n = static_cast<int>(xs.size());
    if (n < d + 1) throw Error("fd_weights: not enough nodes for derivative order");
    std::vector<std::vector<Real>> c(n, std::vector<Real>(d + 1, 0.0));
    Real c1 = 1.0;
    Real c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, d);
        Real c2 = 1.0;
        const Real c5 = c4;
        c4 = xs[i] - x0;
        for (int j = 0; j < i; ++j) {
            const Real c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<Real> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][d];
    return w;
}

/// m-th derivative of a sampled segment at every node, second order.
/// Centered stencils inside, one-sided stencils of matching width at the ends.
inline std::vector<Real> segment_derivative(const std::vector<Real>& v, Real dx, int m) {
    const int n = static_cast<int>(v.size());
    const int width = m + 2 + (m % 2 == 0 ? 1 : 0);  // odd width, order >= 2
    if (n < width) throw Error("segment_derivative: segment too short for stencil");
    const int half = width / 2;
    std::vector<Real> xs(width);
    std::vector<Real> out(n, 0.0);

    auto apply = [&](int node, int start) {
        for (int k = 0; k < width; ++k) xs[k] = (start + k - node) * dx;
        const auto w = fd_weights(0.0, xs, m);
        Real acc = 0.0;
        for (int k = 0; k < width; ++k) acc += w[k] * v[start + k];
        return acc;
    };

    for (int i = 0; i < n; ++i) {
        const int start = std::clamp(i - half, 0, n - width);
        out[i] = apply(i, start);
    }
    return out;
}

}  // namespace detail

/// First spatial derivative, centered 3-point inside each segment and
/// one-sided 3-point at segment ends.
inline ExteriorField derivative(const ExteriorField& f) {
    ExteriorField out(f.grid());
    const Real dx = f.grid().dx;
    for (Side s : {Side::minus, Side::plus}) {
        const auto& v = f.values(s);
        auto& o = out.values(s);
        const int n = static_cast<int>(v.size());
        if (n < 3) throw Error("derivative: need at least 3 nodes per side");
        o[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dx);
        for (int i = 1; i < n - 1; ++i) o[i] = (v[i + 1] - v[i - 1]) / (2.0 * dx);
        o[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dx);
    }
    return out;
}

/// m-th spatial derivative (>= second order accurate everywhere).
inline ExteriorField derivative(const ExteriorField& f, int m) {
    if (m == 0) return f;
    if (m == 1) return derivative(f);
    ExteriorField out(f.grid());
    for (Side s : {Side::minus, Side::plus})
        out.values(s) = detail::segment_derivative(f.values(s), f.grid().dx, m);
    return out;
}

/// Trapezoid integral over both segments.
inline Real integrate(const ExteriorField& f) {
    const Real dx = f.grid().dx;
    Real acc = 0.0;
    for (Side s : {Side::minus, Side::plus}) {
        const auto& v = f.values(s);
        Real seg = 0.5 * (v.front() + v.back());
        for (std::size_t i = 1; i + 1 < v.size(); ++i) seg += v[i];
        acc += seg * dx;
    }
    return acc;
}

inline Real l2_norm_sq(const ExteriorField& f) {
    const Real dx = f.grid().dx;
    Real acc = 0.0;
    for (Side s : {Side::minus, Side::plus}) {
        const auto& v = f.values(s);
        Real seg = 0.5 * (v.front() * v.front() + v.back() * v.back());
        for (std::size_t i = 1; i + 1 < v.size(); ++i) seg += v[i] * v[i];
        acc += seg * dx;
    }
    return acc;
}

inline Real l2_norm(const ExteriorField& f) { return std::sqrt(l2_norm_sq(f)); }

/// Discrete H^k norm: trapezoid-weighted sums of squared difference
/// quotients up to order k.
inline Real sobolev_norm(const ExteriorField& f, int k) {
    Real acc = l2_norm_sq(f);
    for (int m = 1; m <= k; ++m) acc += l2_norm_sq(derivative(f, m));
    return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// State
// ---------------------------------------------------------------------------

/// The evolved pair U = (theta, q) at one time.
struct State {
    Real t = 0.0;
    ExteriorField theta;
    ExteriorField q;

    State() = default;
    State(Real time, ExteriorField th, ExteriorField qq)
        : t(time), theta(std::move(th)), q(std::move(qq)) {}

    static State rest(const GridSpec& g) { return State(0.0, ExteriorField(g), ExteriorField(g)); }
};

/// State admissibility: continuous discharge across the obstacle and a
/// uniformly positive 1 + eps*c'(theta).
inline void validate_state(const State& U, const Parameters& p,
                           Real tol_jump = 1e-10, Real c0 = 0.05) {
    if (std::abs(jump(U.q)) > tol_jump)
        throw Error("state: discharge jump across the obstacle exceeds tolerance");
    for (Side s : {Side::minus, Side::plus})
        for (Real th : U.theta.values(s)) {
            const Real disc = 1.0 + 2.0 * p.epsilon * th;
            if (!(disc > 0.0) || 1.0 / std::sqrt(disc) < c0)
                throw BlowupSignal("state: 1+eps*c'(theta) below floor", U.t);
        }
}

}  // namespace bfloat
