/* C interface for the multibarrier scattering library.
 *
 * All computations work through opaque handles.  Functions that can fail
 * return an mb_status; on any status other than MB_OK the thread-local
 * message from mb_last_error() describes the failure.  Out-parameters are
 * written only on MB_OK.  Every handle returned by a *_create / compute call
 * is owned by the caller and must be released with the matching *_free.
 */
#ifndef MULTIBARRIER_H
#define MULTIBARRIER_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mb_status {
    MB_OK = 0,
    MB_ERR_INVALID = 1, /* bad handle or argument */
    MB_ERR_DOMAIN = 3,  /* precondition or domain violation */
    MB_ERR_NUMERIC = 4  /* numerical failure (overflow, conditioning, accuracy) */
} mb_status;

/* Sentinel barrier count selecting the closed-form limit of infinitely many
 * barriers sharing the same total width and gap. */
#define MB_INFINITE_BARRIERS (-1)

typedef struct mb_spec mb_spec;     /* barrier arrangement */
typedef struct mb_table mb_table;   /* rectangular result table */
typedef struct mb_packet mb_packet; /* evolving wave packet */

const char* mb_version(void);
/* Message for the most recent failure on this thread; empty if none. */
const char* mb_last_error(void);

/* ---------- barrier specifications ---------- */

/* n_barriers >= 1 or MB_INFINITE_BARRIERS.  width_a is the summed barrier
 * width, gap_b the summed gap width, height_v the barrier height. */
mb_status mb_spec_create(int64_t n_barriers, double width_a, double gap_b, double height_v,
                         mb_spec** out);
/* Splits a total length into width and gaps via the gap-to-width ratio c:
 * width_a = length/(1+c), gap_b = length*c/(1+c). */
mb_status mb_spec_from_length_ratio(double length, double ratio_c, int64_t n_barriers,
                                    double height_v, mb_spec** out);
void mb_spec_free(mb_spec* spec);
/* Any out-pointer may be NULL. */
mb_status mb_spec_describe(const mb_spec* spec, int64_t* n_barriers, double* width_a,
                           double* gap_b, double* height_v);

/* ---------- transmission ---------- */

typedef enum mb_method {
    MB_METHOD_EXACT = 0,   /* full interface-matching linear system */
    MB_METHOD_PRODUCT = 1, /* finite transfer-matrix product */
    MB_METHOD_LIMIT = 2    /* closed-form limit of infinitely many barriers */
} mb_method;

mb_status mb_transmission(const mb_spec* spec, double energy, mb_method method, double* out);

/* Sweeps transmission along one axis.  axis is one of:
 *   "energy" - vary the incident energy, spec fixed;
 *   "c"      - vary the gap-to-width ratio at fixed total length, count, height;
 *   "a"      - vary the total barrier width at fixed ratio, count, height.
 * For "c" and "a" the probe energy is taken from the energy argument (ignored
 * for "energy").  Rows that fail keep the axis value, carry NaN in the value
 * column, 0 in the ok column, and the failure message in the text column; the
 * call still returns MB_OK.  Columns: <axis>, transmission, ok. */
mb_status mb_transmission_sweep(const mb_spec* spec, const char* axis, double from, double to,
                                int points, double energy, mb_method method, mb_table** out);

/* Transmission of the infinite-barrier limit over an (energy, c) grid at fixed
 * total length and height.  Columns: energy, c, transmission. */
mb_status mb_transmission_grid(double length, double height_v, double e_min, double e_max,
                               int e_points, double c_min, double c_max, int c_points,
                               mb_table** out);

/* ---------- scattering (infinite-limit S matrix) ---------- */

/* Columns: energy, sigma_plus, sigma_minus, sigma_total, delta_plus,
 * delta_minus.  Requires an infinite spec.  Failing rows are flagged as in
 * mb_transmission_sweep. */
mb_status mb_cross_section_table(const mb_spec* spec, double e_min, double e_max, int points,
                                 mb_table** out);

/* Local maxima of one cross-section branch (+1 or -1) with topographic
 * prominence above min_prominence.  Columns: energy, value, prominence. */
mb_status mb_sigma_peaks(const mb_spec* spec, double e_min, double e_max, int branch,
                         double min_prominence, mb_table** out);

/* Grows the total gap b in steps of width_a/10 until the chosen cross-section
 * branch changes by less than tol (in the max norm over the probe energies)
 * for the rest of the horizon b <= b_max_over_a * width_a.  Writes the first
 * such b to b_star and whether saturation occurred to saturated.  The curve
 * table (optional, may be NULL) has columns b, saturation_metric. */
mb_status mb_saturation_gap(double width_a, double height_v, const double* energies,
                            size_t n_energies, double tol, double b_max_over_a, int branch,
                            double* b_star, int* saturated, mb_table** curve);

/* ---------- bound-region spectrum ---------- */

typedef enum mb_regime_filter {
    MB_REGIME_BOTH = 0,
    MB_REGIME_OVER_ONLY = 1, /* keep levels with energy > height */
    MB_REGIME_UNDER_ONLY = 2 /* keep levels with energy < height */
} mb_regime_filter;

/* Solves the periodic-box quantization condition on [e_min, e_max] with the
 * box wall at |x| = box_half_width.  levels (optional): columns index, energy,
 * unfolded; meta records the count.  histogram (optional): columns bin_left,
 * bin_right, density over nearest-neighbour spacings of the unfolded levels;
 * meta records ks_wigner and ks_poisson. */
mb_status mb_spectrum_compute(const mb_spec* spec, double box_half_width, double e_min,
                              double e_max, mb_regime_filter filter, int bins, mb_table** levels,
                              mb_table** histogram);

/* ---------- resonance poles ---------- */

typedef enum mb_pole_case {
    MB_POLE_OVER = 0,      /* |e| above the barrier height */
    MB_POLE_UNDER_NEG = 1, /* |e| below the height, first root branch */
    MB_POLE_UNDER_POS = 2  /* |e| below the height, second root branch */
} mb_pole_case;

/* Newton search for complex-energy poles seeded on an n1 x n2 grid over
 * [e1_min, e1_max] x [e2_min, e2_max].  The geometry is given by the total
 * length and the gap-to-width ratio.  Columns: e1, e2, branch_k, sign,
 * residual.  Meta records seed/convergence diagnostics. */
mb_status mb_find_poles(double length, double ratio_c, double height_v, double e1_min,
                        double e1_max, double e2_min, double e2_max, int n1, int n2,
                        mb_pole_case pole_case, mb_table** out);

/* Confirms the absence of poles at very large energies: scans the rectangles
 * [e_big, 5 e_big] x [-0.01 e_big, 0.01 e_big] and [e_big, 5 e_big]^2 without
 * the validity filters and writes 1 to confirmed when both come back empty. */
mb_status mb_pole_exclusion(double length, double ratio_c, double height_v,
                            mb_pole_case pole_case, double e_big, int* confirmed);

/* ---------- wave-packet evolution ---------- */

typedef enum mb_scheme {
    MB_SCHEME_SPLIT_STEP = 0, /* unitary split-step with sine-spectral kinetic part */
    MB_SCHEME_STAGGERED = 1   /* explicit staggered leapfrog (compatibility) */
} mb_scheme;

typedef enum mb_boundary {
    MB_BOUNDARY_REFLECTING = 0,
    MB_BOUNDARY_ABSORBING = 1
} mb_boundary;

/* Gaussian packet with mean position x0, mean momentum p0 and momentum-space
 * width w0, sampled at t = 0 on a hard-wall grid of `points` nodes spanning
 * [x_min, x_max] and normalized to unit norm. */
mb_status mb_packet_create(double x0, double p0, double w0, double x_min, double x_max,
                           int points, mb_packet** out);
void mb_packet_free(mb_packet* packet);

/* Lays the barrier array of spec across [region_left, region_right] on the
 * packet's grid; subsequent evolution uses this potential.  Passing spec=NULL
 * restores free evolution. */
mb_status mb_packet_set_barriers(mb_packet* packet, const mb_spec* spec, double region_left,
                                 double region_right);

/* Advances the packet by steps * dt.  Both schemes require dt < dx^2.
 * absorb_fraction is the ramp width per side for the absorbing boundary,
 * ignored for reflecting walls. */
mb_status mb_packet_evolve(mb_packet* packet, double dt, long steps, mb_scheme scheme,
                           mb_boundary boundary, double absorb_fraction);

mb_status mb_packet_time(const mb_packet* packet, double* out);

/* out_metrics receives {norm_total, fraction_left, fraction_inside,
 * fraction_right, spatial_variance, gradient_energy} for the given region. */
mb_status mb_packet_metrics(const mb_packet* packet, double region_left, double region_right,
                            double out_metrics[6]);

/* Columns: x, re_psi, im_psi, abs2. */
mb_status mb_packet_snapshot(const mb_packet* packet, mb_table** out);

/* ---------- result tables ---------- */

/* Tables are rectangular: every numeric column has n_rows entries.  Some
 * tables carry one text column (mb_table_text_name != NULL) and an ordered
 * list of string metadata pairs. */
size_t mb_table_n_rows(const mb_table* table);
size_t mb_table_n_cols(const mb_table* table);
const char* mb_table_col_name(const mb_table* table, size_t col);
mb_status mb_table_value(const mb_table* table, size_t row, size_t col, double* out);
const char* mb_table_text_name(const mb_table* table);
const char* mb_table_text(const mb_table* table, size_t row);
size_t mb_table_n_meta(const mb_table* table);
const char* mb_table_meta_key(const mb_table* table, size_t index);
const char* mb_table_meta_value(const mb_table* table, size_t index);
void mb_table_free(mb_table* table);

#ifdef __cplusplus
}
#endif

#endif /* MULTIBARRIER_H */
