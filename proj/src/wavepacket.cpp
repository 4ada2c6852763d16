#include "wavepacket.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <sstream>
#include <vector>

#include "errors.hpp"

namespace mbar {

namespace {

constexpr double kEdgeLeakTol = 1e-8;      // wall magnitude relative to peak
constexpr double kNormDriftTol = 1e-6;     // cumulative norm drift with reflecting walls
constexpr double kFitSlack = 1e-9;         // relative slack for the array-fits-region check

// The FFTW planner mutates global state; executes are thread-safe, planning is not.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct DstPlan {
    int n = 0;
    double* buf = nullptr;
    fftw_plan plan = nullptr;

    explicit DstPlan(int size) : n(size) {
        buf = static_cast<double*>(fftw_malloc(sizeof(double) * static_cast<size_t>(n)));
        if (buf == nullptr) throw NumericError("failed to allocate transform buffer");
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_r2r_1d(n, buf, buf, FFTW_RODFT00, FFTW_ESTIMATE);
        if (plan == nullptr) {
            fftw_free(buf);
            throw NumericError("failed to plan sine transform");
        }
    }

    ~DstPlan() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
        fftw_free(buf);
    }

    DstPlan(const DstPlan&) = delete;
    DstPlan& operator=(const DstPlan&) = delete;

    void run(std::vector<double>& data) {
        std::copy(data.begin(), data.end(), buf);
        fftw_execute(plan);
        std::copy(buf, buf + n, data.begin());
    }
};

double interior_norm(const std::vector<double>& re, const std::vector<double>& im, double dx) {
    double s = 0.0;
    for (size_t j = 0; j < re.size(); ++j) s += re[j] * re[j] + im[j] * im[j];
    return s * dx;
}

std::vector<double> absorbing_mask(const Grid1D& grid, double fraction) {
    if (!(fraction > 0.0) || !(fraction < 0.5))
        throw DomainError("absorbing ramp fraction must lie in (0, 0.5)");
    const double width = fraction * (grid.x_max - grid.x_min);
    std::vector<double> mask(static_cast<size_t>(grid.points), 1.0);
    for (int j = 0; j < grid.points; ++j) {
        const double x = grid.position(j);
        const double d = std::min(x - grid.x_min, grid.x_max - x);
        if (d < width) {
            const double ramp = std::sin(0.5 * M_PI * d / width);
            mask[static_cast<size_t>(j)] = ramp * ramp;
        }
    }
    return mask;
}

// Hamiltonian action on an interior-node array with hard walls: the value
// beyond either end is taken as zero.
void apply_hamiltonian(const std::vector<double>& u, const std::vector<double>& v_interior,
                       double dx, std::vector<double>& out) {
    const size_t n = u.size();
    const double inv2 = 0.5 / (dx * dx);
    for (size_t j = 0; j < n; ++j) {
        const double left = (j > 0) ? u[j - 1] : 0.0;
        const double right = (j + 1 < n) ? u[j + 1] : 0.0;
        out[j] = -inv2 * (left - 2.0 * u[j] + right) + v_interior[j] * u[j];
    }
}

PacketState evolve_split_step(const PacketState& state, const std::vector<double>& potential,
                              double dt, long steps, const EvolveOptions& options) {
    const Grid1D& grid = state.grid;
    const int n = grid.interior_points();
    const double dx = grid.dx;

    std::vector<double> re(static_cast<size_t>(n)), im(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        re[static_cast<size_t>(j)] = state.psi[static_cast<size_t>(j + 1)].real();
        im[static_cast<size_t>(j)] = state.psi[static_cast<size_t>(j + 1)].imag();
    }

    // Half-step potential phases and full-step kinetic phases for the sine modes.
    std::vector<double> vc(static_cast<size_t>(n)), vs(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        const double theta = 0.5 * potential[static_cast<size_t>(j + 1)] * dt;
        vc[static_cast<size_t>(j)] = std::cos(theta);
        vs[static_cast<size_t>(j)] = std::sin(theta);
    }
    std::vector<double> kc(static_cast<size_t>(n)), ks(static_cast<size_t>(n));
    for (int m = 0; m < n; ++m) {
        const double k = M_PI * (m + 1) / ((n + 1) * dx);
        const double theta = 0.5 * k * k * dt;
        kc[static_cast<size_t>(m)] = std::cos(theta);
        ks[static_cast<size_t>(m)] = std::sin(theta);
    }
    const double scale = 1.0 / (2.0 * (n + 1));

    std::vector<double> mask;
    const bool absorbing = options.boundary == Boundary::Absorbing;
    if (absorbing) mask = absorbing_mask(grid, options.absorb_fraction);

    DstPlan dst(n);
    const double norm0 = interior_norm(re, im, dx);

    auto phase_multiply = [n](std::vector<double>& a, std::vector<double>& b,
                              const std::vector<double>& c, const std::vector<double>& s) {
        // (a + ib) *= (c - is) elementwise
        for (int j = 0; j < n; ++j) {
            const size_t u = static_cast<size_t>(j);
            const double ar = a[u] * c[u] + b[u] * s[u];
            b[u] = b[u] * c[u] - a[u] * s[u];
            a[u] = ar;
        }
    };

    for (long step = 0; step < steps; ++step) {
        phase_multiply(re, im, vc, vs);
        dst.run(re);
        dst.run(im);
        phase_multiply(re, im, kc, ks);
        dst.run(re);
        dst.run(im);
        for (int j = 0; j < n; ++j) {
            re[static_cast<size_t>(j)] *= scale;
            im[static_cast<size_t>(j)] *= scale;
        }
        phase_multiply(re, im, vc, vs);

        if (absorbing) {
            for (int j = 0; j < n; ++j) {
                const double m = mask[static_cast<size_t>(j + 1)];
                re[static_cast<size_t>(j)] *= m;
                im[static_cast<size_t>(j)] *= m;
            }
        } else {
            const double drift = std::abs(interior_norm(re, im, dx) - norm0);
            if (drift > kNormDriftTol * std::max(1.0, norm0)) {
                std::ostringstream msg;
                msg << "norm drifted by " << drift << " after " << (step + 1) << " steps";
                throw AccuracyError(msg.str());
            }
        }
    }

    PacketState out;
    out.grid = grid;
    out.time = state.time + static_cast<double>(steps) * dt;
    out.psi.assign(static_cast<size_t>(grid.points), cplx(0.0, 0.0));
    for (int j = 0; j < n; ++j)
        out.psi[static_cast<size_t>(j + 1)] =
            cplx(re[static_cast<size_t>(j)], im[static_cast<size_t>(j)]);
    return out;
}

PacketState evolve_staggered(const PacketState& state, const std::vector<double>& potential,
                             double dt, long steps, const EvolveOptions& options) {
    const Grid1D& grid = state.grid;
    const int n = grid.interior_points();
    const double dx = grid.dx;

    std::vector<double> r(static_cast<size_t>(n)), im(static_cast<size_t>(n));
    std::vector<double> v_interior(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        r[static_cast<size_t>(j)] = state.psi[static_cast<size_t>(j + 1)].real();
        im[static_cast<size_t>(j)] = state.psi[static_cast<size_t>(j + 1)].imag();
        v_interior[static_cast<size_t>(j)] = potential[static_cast<size_t>(j + 1)];
    }

    std::vector<double> mask;
    const bool absorbing = options.boundary == Boundary::Absorbing;
    if (absorbing) mask = absorbing_mask(grid, options.absorb_fraction);

    std::vector<double> h(static_cast<size_t>(n));

    // Stagger the imaginary part half a step behind, then leapfrog.  The
    // scheme conserves sum R_n^2 + I_{n+1/2} I_{n-1/2} exactly, so that is the
    // quantity monitored for drift.
    apply_hamiltonian(r, v_interior, dx, h);
    double invariant0 = 0.0;
    {
        double p = 0.0;
        for (int j = 0; j < n; ++j) {
            const size_t u = static_cast<size_t>(j);
            const double ip = im[u] + 0.5 * dt * h[u];
            const double imh = im[u] - 0.5 * dt * h[u];
            p += r[u] * r[u] + ip * imh;
        }
        invariant0 = p * dx;
    }
    for (int j = 0; j < n; ++j) im[static_cast<size_t>(j)] -= 0.5 * dt * h[static_cast<size_t>(j)];

    for (long step = 0; step < steps; ++step) {
        apply_hamiltonian(im, v_interior, dx, h);
        for (int j = 0; j < n; ++j) r[static_cast<size_t>(j)] += dt * h[static_cast<size_t>(j)];
        apply_hamiltonian(r, v_interior, dx, h);
        double p = 0.0;
        for (int j = 0; j < n; ++j) {
            const size_t u = static_cast<size_t>(j);
            const double i_old = im[u];
            im[u] -= dt * h[u];
            p += r[u] * r[u] + im[u] * i_old;
        }
        if (absorbing) {
            for (int j = 0; j < n; ++j) {
                const double m = mask[static_cast<size_t>(j + 1)];
                r[static_cast<size_t>(j)] *= m;
                im[static_cast<size_t>(j)] *= m;
            }
        } else {
            const double drift = std::abs(p * dx - invariant0);
            if (drift > kNormDriftTol * std::max(1.0, invariant0)) {
                std::ostringstream msg;
                msg << "conserved quadratic form drifted by " << drift << " after " << (step + 1)
                    << " steps";
                throw AccuracyError(msg.str());
            }
        }
    }

    // Bring the imaginary part back onto integer time.
    apply_hamiltonian(r, v_interior, dx, h);
    for (int j = 0; j < n; ++j) im[static_cast<size_t>(j)] += 0.5 * dt * h[static_cast<size_t>(j)];

    PacketState out;
    out.grid = grid;
    out.time = state.time + static_cast<double>(steps) * dt;
    out.psi.assign(static_cast<size_t>(grid.points), cplx(0.0, 0.0));
    for (int j = 0; j < n; ++j)
        out.psi[static_cast<size_t>(j + 1)] =
            cplx(r[static_cast<size_t>(j)], im[static_cast<size_t>(j)]);
    return out;
}

}  // namespace

Grid1D make_grid(double x_min, double x_max, int points) {
    if (!(x_max > x_min)) throw DomainError("grid requires x_max > x_min");
    if (points < 8) throw DomainError("grid requires at least 8 points");
    Grid1D g;
    g.x_min = x_min;
    g.x_max = x_max;
    g.points = points;
    g.dx = (x_max - x_min) / (points - 1);
    return g;
}

double PacketState::norm() const {
    double s = 0.0;
    for (const cplx& value : psi) s += std::norm(value);
    return s * grid.dx;
}

cplx free_packet(const PacketParams& params, double x, double t, int time_direction) {
    const double w2 = params.w0 * params.w0;
    const cplx tau(1.0, 2.0 * time_direction * t * w2);
    const double amp =
        std::sqrt(params.w0) * std::pow(M_PI, 0.25) * std::exp(-params.p0 * params.p0 / (4.0 * w2));
    const cplx u = cplx(0.0, params.x0 - x) - params.p0 / (2.0 * w2);
    return amp * std::exp(w2 * u * u / tau) / std::sqrt(tau);
}

PacketState initial_packet(const PacketParams& params, const Grid1D& grid, double t,
                           int time_direction) {
    if (!(params.w0 > 0.0)) throw DomainError("packet width w0 must be positive");
    if (grid.points < 8 || !(grid.dx > 0.0)) throw DomainError("grid is not initialized");

    PacketState state;
    state.grid = grid;
    state.time = t;
    state.psi.resize(static_cast<size_t>(grid.points));
    double peak = 0.0;
    for (int j = 0; j < grid.points; ++j) {
        state.psi[static_cast<size_t>(j)] = free_packet(params, grid.position(j), t, time_direction);
        peak = std::max(peak, std::abs(state.psi[static_cast<size_t>(j)]));
    }
    const double left = std::abs(state.psi.front());
    const double right = std::abs(state.psi.back());
    if (left > kEdgeLeakTol * peak || right > kEdgeLeakTol * peak) {
        std::ostringstream msg;
        msg << "packet magnitude at the grid edges is " << std::max(left, right) / peak
            << " of the peak; widen the grid beyond [" << grid.x_min << ", " << grid.x_max << "]";
        throw DomainError(msg.str());
    }
    state.psi.front() = cplx(0.0, 0.0);
    state.psi.back() = cplx(0.0, 0.0);

    const double n = state.norm();
    if (!(n > 0.0)) throw DomainError("packet vanishes on the grid");
    const double s = 1.0 / std::sqrt(n);
    for (cplx& value : state.psi) value *= s;
    return state;
}

std::vector<double> potential_on_grid(const BarrierSpec& spec, const Grid1D& grid,
                                      double region_left, double region_right) {
    if (spec.infinite()) throw DomainError("potential layout requires a finite barrier count");
    if (!(region_right > region_left)) throw DomainError("region must have positive length");
    if (region_left < grid.x_min - 1e-12 || region_right > grid.x_max + 1e-12)
        throw DomainError("region extends beyond the grid");

    const int n_b = spec.n_barriers;
    const double wb = spec.total_width_a / n_b;
    const double wg = (n_b > 1) ? spec.total_gap_b / (n_b - 1) : 0.0;
    if (wb < 2.0 * grid.dx) {
        std::ostringstream msg;
        msg << "barrier width " << wb << " is under-resolved at dx = " << grid.dx
            << "; each barrier must span at least two cells";
        throw DomainError(msg.str());
    }
    const double extent = (n_b - 1) * (wb + wg) + wb;
    const double length = region_right - region_left;
    if (extent > length + kFitSlack * std::max(1.0, extent))
        throw DomainError("barrier array does not fit inside the region");

    std::vector<double> v(static_cast<size_t>(grid.points), 0.0);
    const double period = wb + wg;
    for (int j = 0; j < grid.points; ++j) {
        const double rel = grid.position(j) - region_left;
        if (rel < 0.0 || rel > extent) continue;
        const int m = (period > 0.0) ? static_cast<int>(std::floor(rel / period)) : 0;
        if (m < 0 || m >= n_b) continue;
        if (rel - m * period < wb) v[static_cast<size_t>(j)] = spec.height_v;
    }
    return v;
}

PacketState evolve(const PacketState& state, const std::vector<double>& potential, double dt,
                   long steps, const EvolveOptions& options) {
    const Grid1D& grid = state.grid;
    if (state.psi.size() != static_cast<size_t>(grid.points) || grid.points < 8)
        throw DomainError("packet state is not initialized");
    if (potential.size() != static_cast<size_t>(grid.points))
        throw DomainError("potential array does not match the grid");
    if (steps < 0) throw DomainError("step count must be nonnegative");
    if (!(dt > 0.0)) throw DomainError("time step must be positive");
    if (!(dt < grid.dx * grid.dx)) {
        std::ostringstream msg;
        msg << "time step " << dt << " violates the stability requirement dt < dx^2 = "
            << grid.dx * grid.dx;
        throw StabilityError(msg.str());
    }
    for (double value : potential)
        if (!std::isfinite(value)) throw DomainError("potential contains non-finite values");

    if (options.scheme == Scheme::StaggeredExplicit)
        return evolve_staggered(state, potential, dt, steps, options);
    return evolve_split_step(state, potential, dt, steps, options);
}

PacketMetrics packet_metrics(const PacketState& state, double region_left, double region_right) {
    if (!(region_right > region_left)) throw DomainError("region must have positive length");
    const Grid1D& grid = state.grid;
    const double dx = grid.dx;

    PacketMetrics m;
    double inside_mass = 0.0, inside_x = 0.0;
    for (int j = 0; j < grid.points; ++j) {
        const double w = std::norm(state.psi[static_cast<size_t>(j)]) * dx;
        const double x = grid.position(j);
        m.norm_total += w;
        if (x < region_left) {
            m.fraction_left += w;
        } else if (x > region_right) {
            m.fraction_right += w;
        } else {
            m.fraction_inside += w;
            inside_mass += w;
            inside_x += w * x;
        }
    }
    if (inside_mass > 0.0) {
        const double mean = inside_x / inside_mass;
        double var = 0.0;
        for (int j = 0; j < grid.points; ++j) {
            const double x = grid.position(j);
            if (x < region_left || x > region_right) continue;
            const double w = std::norm(state.psi[static_cast<size_t>(j)]) * dx;
            var += w * (x - mean) * (x - mean);
        }
        m.spatial_variance = var / inside_mass;
    }
    for (int j = 0; j + 1 < grid.points; ++j) {
        const cplx diff = state.psi[static_cast<size_t>(j + 1)] - state.psi[static_cast<size_t>(j)];
        m.gradient_energy += std::norm(diff) / dx;
    }
    return m;
}

}  // namespace mbar
