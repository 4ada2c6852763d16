#include "multibarrier.h"

#include <cmath>
#include <cstring>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "errors.hpp"
#include "exactsolve.hpp"
#include "resonance.hpp"
#include "scattering.hpp"
#include "spectrum.hpp"
#include "transfer.hpp"
#include "wavepacket.hpp"

struct mb_spec {
    mbar::BarrierSpec value;
};

struct mb_table {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::string text_name;               // empty when there is no text column
    std::vector<std::string> text;       // parallel to rows when text_name set
    std::vector<std::pair<std::string, std::string>> meta;

    size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

struct mb_packet {
    mbar::PacketState state;
    std::vector<double> potential;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

template <typename Fn>
mb_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return MB_OK;
    } catch (const mbar::DomainError& err) {
        set_error(err.what());
        return MB_ERR_DOMAIN;
    } catch (const mbar::NumericError& err) {
        set_error(err.what());
        return MB_ERR_NUMERIC;
    } catch (const std::exception& err) {
        set_error(err.what());
        return MB_ERR_NUMERIC;
    }
}

mb_status invalid(const char* message) {
    set_error(message);
    return MB_ERR_INVALID;
}

std::unique_ptr<mb_table> new_table(std::vector<std::string> names) {
    auto table = std::make_unique<mb_table>();
    table->names = std::move(names);
    table->columns.resize(table->names.size());
    return table;
}

void push_meta(mb_table& table, const std::string& key, const std::string& value) {
    table.meta.emplace_back(key, value);
}

void push_meta(mb_table& table, const std::string& key, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    table.meta.emplace_back(key, buf);
}

void push_meta(mb_table& table, const std::string& key, std::int64_t value) {
    table.meta.emplace_back(key, std::to_string(value));
}

double sweep_value(const mbar::BarrierSpec& spec, double e, mb_method method) {
    switch (method) {
        case MB_METHOD_EXACT:
            return mbar::transmission_exact(spec, e);
        case MB_METHOD_PRODUCT:
            return mbar::transmission_from_product(mbar::finite_product(spec, e));
        case MB_METHOD_LIMIT:
            return mbar::transmission_limit(spec, e);
    }
    throw mbar::DomainError("unknown transmission method");
}

mbar::PoleCase to_pole_case(mb_pole_case value) {
    switch (value) {
        case MB_POLE_OVER:
            return mbar::PoleCase::Over;
        case MB_POLE_UNDER_NEG:
            return mbar::PoleCase::UnderNeg;
        case MB_POLE_UNDER_POS:
            return mbar::PoleCase::UnderPos;
    }
    throw mbar::DomainError("unknown pole case");
}

mbar::ResonanceParams resonance_params(double length, double ratio_c, double height_v) {
    if (!(length > 0.0) || !(ratio_c > 0.0))
        throw mbar::DomainError("pole search requires positive length and ratio");
    mbar::ResonanceParams p;
    p.L = length;
    p.c = ratio_c;
    p.a = length / (1.0 + ratio_c);
    p.v = height_v;
    return p;
}

}  // namespace

extern "C" {

const char* mb_version(void) { return "1.0.0"; }

const char* mb_last_error(void) { return g_last_error.c_str(); }

mb_status mb_spec_create(int64_t n_barriers, double width_a, double gap_b, double height_v,
                         mb_spec** out) {
    if (out == nullptr) return invalid("out pointer is null");
    return guarded([&] {
        auto spec = std::make_unique<mb_spec>();
        spec->value = mbar::make_spec(n_barriers, width_a, gap_b, height_v);
        *out = spec.release();
    });
}

mb_status mb_spec_from_length_ratio(double length, double ratio_c, int64_t n_barriers,
                                    double height_v, mb_spec** out) {
    if (out == nullptr) return invalid("out pointer is null");
    return guarded([&] {
        auto spec = std::make_unique<mb_spec>();
        spec->value = mbar::spec_from_length_ratio(length, ratio_c, n_barriers, height_v);
        *out = spec.release();
    });
}

void mb_spec_free(mb_spec* spec) { delete spec; }

mb_status mb_spec_describe(const mb_spec* spec, int64_t* n_barriers, double* width_a,
                           double* gap_b, double* height_v) {
    if (spec == nullptr) return invalid("spec handle is null");
    if (n_barriers != nullptr) *n_barriers = spec->value.n_barriers;
    if (width_a != nullptr) *width_a = spec->value.total_width_a;
    if (gap_b != nullptr) *gap_b = spec->value.total_gap_b;
    if (height_v != nullptr) *height_v = spec->value.height_v;
    return MB_OK;
}

mb_status mb_transmission(const mb_spec* spec, double energy, mb_method method, double* out) {
    if (spec == nullptr) return invalid("spec handle is null");
    if (out == nullptr) return invalid("out pointer is null");
    return guarded([&] { *out = sweep_value(spec->value, energy, method); });
}

mb_status mb_transmission_sweep(const mb_spec* spec, const char* axis, double from, double to,
                                int points, double energy, mb_method method, mb_table** out) {
    if (spec == nullptr) return invalid("spec handle is null");
    if (axis == nullptr) return invalid("axis is null");
    if (out == nullptr) return invalid("out pointer is null");
    const std::string axis_name(axis);
    if (axis_name != "energy" && axis_name != "c" && axis_name != "a")
        return invalid("axis must be one of energy, c, a");
    if (points < 2) return invalid("sweep needs at least 2 points");
    return guarded([&] {
        const mbar::BarrierSpec& base = spec->value;
        auto table = new_table({axis_name, "transmission", "ok"});
        table->text_name = "message";
        const double step = (to - from) / (points - 1);
        for (int i = 0; i < points; ++i) {
            const double x = from + i * step;
            double value = std::nan("");
            std::string message;
            double ok = 0.0;
            try {
                if (axis_name == "energy") {
                    value = sweep_value(base, x, method);
                } else if (axis_name == "c") {
                    const mbar::BarrierSpec probe = mbar::spec_from_length_ratio(
                        base.span(), x, base.n_barriers, base.height_v);
                    value = sweep_value(probe, energy, method);
                } else {
                    const mbar::BarrierSpec probe = mbar::make_spec(
                        base.n_barriers, x, x * base.ratio_c(), base.height_v);
                    value = sweep_value(probe, energy, method);
                }
                ok = 1.0;
            } catch (const std::exception& err) {
                message = err.what();
            }
            table->columns[0].push_back(x);
            table->columns[1].push_back(value);
            table->columns[2].push_back(ok);
            table->text.push_back(std::move(message));
        }
        *out = table.release();
    });
}

mb_status mb_transmission_grid(double length, double height_v, double e_min, double e_max,
                               int e_points, double c_min, double c_max, int c_points,
                               mb_table** out) {
    if (out == nullptr) return invalid("out pointer is null");
    if (e_points < 2 || c_points < 2) return invalid("grid needs at least 2 points per axis");
    return guarded([&] {
        auto table = new_table({"energy", "c", "transmission"});
        const double de = (e_max - e_min) / (e_points - 1);
        const double dc = (c_max - c_min) / (c_points - 1);
        for (int i = 0; i < e_points; ++i) {
            const double e = e_min + i * de;
            for (int j = 0; j < c_points; ++j) {
                const double c = c_min + j * dc;
                const mbar::BarrierSpec probe = mbar::spec_from_length_ratio(
                    length, c, mbar::kInfiniteBarriers, height_v);
                table->columns[0].push_back(e);
                table->columns[1].push_back(c);
                table->columns[2].push_back(mbar::transmission_limit(probe, e));
            }
        }
        push_meta(*table, "length", length);
        push_meta(*table, "height", height_v);
        *out = table.release();
    });
}

mb_status mb_cross_section_table(const mb_spec* spec, double e_min, double e_max, int points,
                                 mb_table** out) {
    if (spec == nullptr) return invalid("spec handle is null");
    if (out == nullptr) return invalid("out pointer is null");
    if (points < 2) return invalid("table needs at least 2 points");
    return guarded([&] {
        auto table = new_table({"energy", "sigma_plus", "sigma_minus", "sigma_total",
                                "delta_plus", "delta_minus", "ok"});
        table->text_name = "message";
        const double step = (e_max - e_min) / (points - 1);
        for (int i = 0; i < points; ++i) {
            const double e = e_min + i * step;
            double row[5] = {std::nan(""), std::nan(""), std::nan(""), std::nan(""),
                             std::nan("")};
            double ok = 0.0;
            std::string message;
            try {
                const mbar::EigenPhases phases = mbar::eigen_phases(spec->value, e);
                row[0] = phases.sigma_plus;
                row[1] = phases.sigma_minus;
                row[2] = phases.sigma_total;
                row[3] = phases.delta_plus;
                row[4] = phases.delta_minus;
                ok = 1.0;
            } catch (const std::exception& err) {
                message = err.what();
            }
            table->columns[0].push_back(e);
            table->columns[1].push_back(row[0]);
            table->columns[2].push_back(row[1]);
            table->columns[3].push_back(row[2]);
            table->columns[4].push_back(row[3]);
            table->columns[5].push_back(row[4]);
            table->columns[6].push_back(ok);
            table->text.push_back(std::move(message));
        }
        *out = table.release();
    });
}

mb_status mb_sigma_peaks(const mb_spec* spec, double e_min, double e_max, int branch,
                         double min_prominence, mb_table** out) {
    if (spec == nullptr) return invalid("spec handle is null");
    if (out == nullptr) return invalid("out pointer is null");
    return guarded([&] {
        const std::vector<mbar::Peak> peaks =
            mbar::find_sigma_peaks(spec->value, e_min, e_max, branch, min_prominence);
        auto table = new_table({"energy", "value", "prominence"});
        for (const mbar::Peak& peak : peaks) {
            table->columns[0].push_back(peak.energy);
            table->columns[1].push_back(peak.value);
            table->columns[2].push_back(peak.prominence);
        }
        push_meta(*table, "peak_count", static_cast<std::int64_t>(peaks.size()));
        *out = table.release();
    });
}

mb_status mb_saturation_gap(double width_a, double height_v, const double* energies,
                            size_t n_energies, double tol, double b_max_over_a, int branch,
                            double* b_star, int* saturated, mb_table** curve) {
    if (energies == nullptr || n_energies == 0) return invalid("energy list is empty");
    if (b_star == nullptr || saturated == nullptr) return invalid("out pointer is null");
    return guarded([&] {
        const std::vector<double> grid(energies, energies + n_energies);
        const mbar::SaturationResult result =
            mbar::saturation_gap(width_a, height_v, grid, tol, b_max_over_a, branch);
        *b_star = result.b_star;
        *saturated = result.saturated ? 1 : 0;
        if (curve != nullptr) {
            auto table = new_table({"b", "saturation_metric"});
            table->columns[0] = result.b_samples;
            table->columns[1] = result.metric;
            push_meta(*table, "b_star", result.b_star);
            push_meta(*table, "saturated", std::string(result.saturated ? "true" : "false"));
            push_meta(*table, "last_delta", result.last_delta);
            *curve = table.release();
        }
    });
}

mb_status mb_spectrum_compute(const mb_spec* spec, double box_half_width, double e_min,
                              double e_max, mb_regime_filter filter, int bins, mb_table** levels,
                              mb_table** histogram) {
    if (spec == nullptr) return invalid("spec handle is null");
    if (levels == nullptr && histogram == nullptr) return invalid("no output requested");
    return guarded([&] {
        mbar::QuantizationProblem problem;
        problem.spec = spec->value;
        problem.box_half_width_c = box_half_width;
        problem.e_min = e_min;
        problem.e_max = e_max;
        switch (filter) {
            case MB_REGIME_BOTH:
                problem.filter = mbar::RegimeFilter::Both;
                break;
            case MB_REGIME_OVER_ONLY:
                problem.filter = mbar::RegimeFilter::OverOnly;
                break;
            case MB_REGIME_UNDER_ONLY:
                problem.filter = mbar::RegimeFilter::UnderOnly;
                break;
            default:
                throw mbar::DomainError("unknown regime filter");
        }
        mbar::LevelSet set = mbar::find_levels(problem);
        std::unique_ptr<mb_table> levels_table;
        std::unique_ptr<mb_table> hist_table;
        if (levels != nullptr) {
            levels_table = new_table({"index", "energy", "unfolded"});
            mbar::LevelSet unfolded = set;
            bool have_unfolded = true;
            try {
                unfolded = mbar::unfold(set);
            } catch (const mbar::InsufficientDataError&) {
                have_unfolded = false;
            }
            for (size_t i = 0; i < set.energies.size(); ++i) {
                levels_table->columns[0].push_back(static_cast<double>(i + 1));
                levels_table->columns[1].push_back(set.energies[i]);
                levels_table->columns[2].push_back(
                    have_unfolded ? unfolded.unfolded[i] : std::nan(""));
            }
            push_meta(*levels_table, "level_count",
                      static_cast<std::int64_t>(set.energies.size()));
            push_meta(*levels_table, "box_half_width", box_half_width);
        }
        if (histogram != nullptr) {
            const mbar::LevelSet unfolded = mbar::unfold(set);
            const mbar::SpacingStatistics stats = mbar::spacing_statistics(unfolded, bins);
            hist_table = new_table({"bin_left", "bin_right", "density"});
            hist_table->columns[0] = stats.bin_left;
            hist_table->columns[1] = stats.bin_right;
            hist_table->columns[2] = stats.density;
            push_meta(*hist_table, "ks_wigner", stats.wigner_distance);
            push_meta(*hist_table, "ks_poisson", stats.poisson_distance);
            push_meta(*hist_table, "level_count",
                      static_cast<std::int64_t>(set.energies.size()));
        }
        if (levels != nullptr) *levels = levels_table.release();
        if (histogram != nullptr) *histogram = hist_table.release();
    });
}

mb_status mb_find_poles(double length, double ratio_c, double height_v, double e1_min,
                        double e1_max, double e2_min, double e2_max, int n1, int n2,
                        mb_pole_case pole_case, mb_table** out) {
    if (out == nullptr) return invalid("out pointer is null");
    return guarded([&] {
        const mbar::ResonanceParams params = resonance_params(length, ratio_c, height_v);
        mbar::SearchRectangle rect;
        rect.e1_min = e1_min;
        rect.e1_max = e1_max;
        rect.e2_min = e2_min;
        rect.e2_max = e2_max;
        rect.n1 = n1;
        rect.n2 = n2;
        const mbar::PoleSearchResult result =
            mbar::find_poles(params, rect, to_pole_case(pole_case));
        auto table = new_table({"e1", "e2", "branch_k", "sign", "residual"});
        for (const mbar::PoleHit& hit : result.poles) {
            table->columns[0].push_back(hit.e.e1);
            table->columns[1].push_back(hit.e.e2);
            table->columns[2].push_back(static_cast<double>(hit.branch_k));
            table->columns[3].push_back(static_cast<double>(hit.sign));
            table->columns[4].push_back(hit.residual_norm);
        }
        const mbar::PoleDiagnostics& diag = result.diagnostics;
        push_meta(*table, "seeds", diag.seeds);
        push_meta(*table, "converged", diag.converged);
        push_meta(*table, "accepted", diag.accepted);
        push_meta(*table, "rejected_filter", diag.rejected_filter);
        push_meta(*table, "rejected_condition", diag.rejected_condition);
        push_meta(*table, "skipped_degenerate", diag.skipped_degenerate);
        push_meta(*table, "skipped_nonfinite", diag.skipped_nonfinite);
        *out = table.release();
    });
}

mb_status mb_pole_exclusion(double length, double ratio_c, double height_v,
                            mb_pole_case pole_case, double e_big, int* confirmed) {
    if (confirmed == nullptr) return invalid("out pointer is null");
    return guarded([&] {
        const mbar::ResonanceParams params = resonance_params(length, ratio_c, height_v);
        const mbar::ExclusionVerdict verdict =
            mbar::large_energy_exclusion(params, to_pole_case(pole_case), e_big);
        *confirmed = verdict.confirmed ? 1 : 0;
    });
}

mb_status mb_packet_create(double x0, double p0, double w0, double x_min, double x_max,
                           int points, mb_packet** out) {
    if (out == nullptr) return invalid("out pointer is null");
    return guarded([&] {
        auto packet = std::make_unique<mb_packet>();
        const mbar::Grid1D grid = mbar::make_grid(x_min, x_max, points);
        packet->state = mbar::initial_packet({x0, p0, w0}, grid);
        packet->potential.assign(static_cast<size_t>(points), 0.0);
        *out = packet.release();
    });
}

void mb_packet_free(mb_packet* packet) { delete packet; }

mb_status mb_packet_set_barriers(mb_packet* packet, const mb_spec* spec, double region_left,
                                 double region_right) {
    if (packet == nullptr) return invalid("packet handle is null");
    return guarded([&] {
        if (spec == nullptr) {
            packet->potential.assign(packet->state.psi.size(), 0.0);
        } else {
            packet->potential = mbar::potential_on_grid(spec->value, packet->state.grid,
                                                        region_left, region_right);
        }
    });
}

mb_status mb_packet_evolve(mb_packet* packet, double dt, long steps, mb_scheme scheme,
                           mb_boundary boundary, double absorb_fraction) {
    if (packet == nullptr) return invalid("packet handle is null");
    return guarded([&] {
        mbar::EvolveOptions options;
        options.scheme = (scheme == MB_SCHEME_STAGGERED) ? mbar::Scheme::StaggeredExplicit
                                                         : mbar::Scheme::SplitStep;
        options.boundary = (boundary == MB_BOUNDARY_ABSORBING) ? mbar::Boundary::Absorbing
                                                               : mbar::Boundary::Reflecting;
        options.absorb_fraction = absorb_fraction;
        packet->state = mbar::evolve(packet->state, packet->potential, dt, steps, options);
    });
}

mb_status mb_packet_time(const mb_packet* packet, double* out) {
    if (packet == nullptr) return invalid("packet handle is null");
    if (out == nullptr) return invalid("out pointer is null");
    *out = packet->state.time;
    return MB_OK;
}

mb_status mb_packet_metrics(const mb_packet* packet, double region_left, double region_right,
                            double out_metrics[6]) {
    if (packet == nullptr) return invalid("packet handle is null");
    if (out_metrics == nullptr) return invalid("out pointer is null");
    return guarded([&] {
        const mbar::PacketMetrics metrics =
            mbar::packet_metrics(packet->state, region_left, region_right);
        out_metrics[0] = metrics.norm_total;
        out_metrics[1] = metrics.fraction_left;
        out_metrics[2] = metrics.fraction_inside;
        out_metrics[3] = metrics.fraction_right;
        out_metrics[4] = metrics.spatial_variance;
        out_metrics[5] = metrics.gradient_energy;
    });
}

mb_status mb_packet_snapshot(const mb_packet* packet, mb_table** out) {
    if (packet == nullptr) return invalid("packet handle is null");
    if (out == nullptr) return invalid("out pointer is null");
    return guarded([&] {
        auto table = new_table({"x", "re_psi", "im_psi", "abs2"});
        const mbar::PacketState& state = packet->state;
        for (int j = 0; j < state.grid.points; ++j) {
            const mbar::cplx value = state.psi[static_cast<size_t>(j)];
            table->columns[0].push_back(state.grid.position(j));
            table->columns[1].push_back(value.real());
            table->columns[2].push_back(value.imag());
            table->columns[3].push_back(std::norm(value));
        }
        push_meta(*table, "time", state.time);
        push_meta(*table, "norm", state.norm());
        *out = table.release();
    });
}

size_t mb_table_n_rows(const mb_table* table) { return table == nullptr ? 0 : table->rows(); }

size_t mb_table_n_cols(const mb_table* table) {
    return table == nullptr ? 0 : table->columns.size();
}

const char* mb_table_col_name(const mb_table* table, size_t col) {
    if (table == nullptr || col >= table->names.size()) return nullptr;
    return table->names[col].c_str();
}

mb_status mb_table_value(const mb_table* table, size_t row, size_t col, double* out) {
    if (table == nullptr) return invalid("table handle is null");
    if (out == nullptr) return invalid("out pointer is null");
    if (col >= table->columns.size() || row >= table->rows())
        return invalid("table index out of range");
    *out = table->columns[col][row];
    return MB_OK;
}

const char* mb_table_text_name(const mb_table* table) {
    if (table == nullptr || table->text_name.empty()) return nullptr;
    return table->text_name.c_str();
}

const char* mb_table_text(const mb_table* table, size_t row) {
    if (table == nullptr || table->text_name.empty() || row >= table->text.size()) return nullptr;
    return table->text[row].c_str();
}

size_t mb_table_n_meta(const mb_table* table) { return table == nullptr ? 0 : table->meta.size(); }

const char* mb_table_meta_key(const mb_table* table, size_t index) {
    if (table == nullptr || index >= table->meta.size()) return nullptr;
    return table->meta[index].first.c_str();
}

const char* mb_table_meta_value(const mb_table* table, size_t index) {
    if (table == nullptr || index >= table->meta.size()) return nullptr;
    return table->meta[index].second.c_str();
}

void mb_table_free(mb_table* table) { delete table; }

}  // extern "C"
