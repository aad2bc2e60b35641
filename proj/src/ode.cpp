#include "ppm/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ppm {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double scaled_norm(const Vector& e, const Vector& y0, const Vector& y1, const OdeOptions& o)
{
    double n = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        const double sc = o.atol + o.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        n = std::max(n, std::abs(e[i]) / sc);
    }
    return n;
}

} // namespace

OdeStats integrate_dopri5(const Rhs& f, Vector y, std::span<const double> grid, const GridSink& sink,
                          const OdeOptions& opts)
{
    OdeStats st;
    if (grid.empty())
        return st;
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] >= grid[i - 1]))
            throw ValidationError("time grid must be non-decreasing");

    const Eigen::Index n = y.size();
    double t = grid.front();
    const double t_end = grid.back();
    std::size_t next = 0;
    while (next < grid.size() && grid[next] <= t) {
        sink(next, y);
        ++next;
    }
    st.delivered = next;
    if (next == grid.size() || n == 0) {
        for (; next < grid.size(); ++next)
            sink(next, y);
        st.delivered = grid.size();
        return st;
    }

    const double limit = opts.blowup * std::max(max_abs(y), 1e-300);
    Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n), err(n);
    Vector r1(n), r2(n), r3(n), r4(n), r5(n);
    auto eval = [&](const Vector& x, Vector& out) {
        f(x, out);
        ++st.evaluations;
    };
    eval(y, k1);

    // Initial step (Hairer, Norsett & Wanner II.4).
    double h;
    {
        auto sc = [&](const Vector& v) {
            double m = 0.0;
            for (Eigen::Index i = 0; i < n; ++i)
                m = std::max(m, std::abs(v[i]) / (opts.atol + opts.rtol * std::abs(y[i])));
            return m;
        };
        const double d0 = sc(y), d1n = sc(k1);
        double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
        h0 = std::min(h0, t_end - t);
        tmp = y + h0 * k1;
        eval(tmp, k2);
        const double d2 = sc(k2 - k1) / h0;
        const double m = std::max(d1n, d2);
        const double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 0.2);
        h = std::min({100 * h0, h1, t_end - t, opts.h_max});
    }

    double err_old = 1e-4;
    bool rejected_last = false;
    while (t < t_end) {
        if (st.steps + st.rejected >= opts.max_steps)
            throw SolverError("integrator: step budget of " + std::to_string(opts.max_steps) + " exhausted at t = "
                              + std::to_string(t));
        if (t + h > t_end)
            h = t_end - t;
        if (h <= 1e-14 * std::max(1.0, std::abs(t)))
            throw SolverError("integrator: step size underflow at t = " + std::to_string(t));

        tmp = y + h * a21 * k1;
        eval(tmp, k2);
        tmp = y + h * (a31 * k1 + a32 * k2);
        eval(tmp, k3);
        tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        eval(tmp, k4);
        tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        eval(tmp, k5);
        tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        eval(tmp, k6);
        ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        eval(ynew, k7);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double en = scaled_norm(err, y, ynew, opts);
        if (!std::isfinite(en))
            en = 1e10;

        if (en <= 1.0) {
            // Dense output on [t, t + h].
            r1 = y;
            r2 = ynew - y;
            r3 = h * k1 - r2;
            r4 = r2 - h * k7 - r3;
            r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            const double t_new = t + h;
            while (next < grid.size() && grid[next] <= t_new) {
                const double th = (grid[next] - t) / h;
                const double th1 = 1.0 - th;
                tmp = r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
                sink(next, next + 1 == grid.size() && grid[next] == t_end ? ynew : tmp);
                ++next;
            }
            st.delivered = next;
            ++st.steps;
            t = t_new;
            y.swap(ynew);
            k1.swap(k7);
            if (max_abs(y) > limit) {
                st.unstable = true;
                return st;
            }
            // PI controller (beta = 0.04).
            double fac = 0.9 * std::pow(std::max(en, 1e-10), -0.17) * std::pow(err_old, 0.04);
            fac = std::clamp(fac, 0.2, 10.0);
            if (rejected_last)
                fac = std::min(fac, 1.0);
            err_old = std::max(en, 1e-4);
            h = std::min(h * fac, opts.h_max);
            rejected_last = false;
        } else {
            ++st.rejected;
            h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
            rejected_last = true;
        }
    }
    for (; next < grid.size(); ++next)
        sink(next, y);
    st.delivered = grid.size();
    return st;
}

} // namespace ppm
