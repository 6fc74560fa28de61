#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "pano/common.hpp"
#include "pano/layout.hpp"

namespace pano {

/// Dataset-level energy compaction diagnostics: the mean normalized tail
/// curve and the decay-rate estimates derived from it.
struct CompactionReport {
    std::vector<double> mean_tail_ratio;  // length d+1, per-dimension, starts at 1, ends at 0
    std::vector<double> p_values;
    std::vector<double> alpha_p;          // +inf where the tail vanished
    double alpha_hat = 0.0;               // mean over finite alpha_p
    std::size_t infinite_alpha_count = 0;
    double predicted_fraction() const { return 1.0 / alpha_hat; }

    void write_csv(std::ostream& out) const;
};

/// alpha_p = -(d/l_p) * ln(mean tail ratio at l_p) with l_p = round(p*d),
/// ratios averaged over vectors before the log. alpha_hat averages the
/// finite alpha_p.
CompactionReport estimate_alpha(const TransformedDataset& data,
                                const std::vector<double>& p_values = {0.1, 0.25, 0.5});

/// Same estimator over raw transformed coefficients.
CompactionReport estimate_alpha(const MatrixF& transformed_coeffs,
                                const std::vector<double>& p_values = {0.1, 0.25, 0.5});

/// Asymptotic prediction for the processed-dimension fraction phi.
double expected_cost_fraction(double alpha);

/// Effective compaction under asymmetric query/database decay rates.
double effective_alpha(double alpha_q, double alpha_x);

/// Inverse standard normal CDF, absolute error <= 1e-9.
double inverse_normal_cdf(double p);

/// High-probability pruning margin Delta_i = -sigma * Phi^{-1}(k/(i+1) + epsilon).
double margin(std::uint64_t i, std::uint64_t k, double sigma, double epsilon);

/// Expected dimensions processed before pruning a candidate with margin
/// delta: (d/alpha) * max(0, ln(C0/delta)), clamped to [0, d].
double pruning_dimension(double delta, double c0, double alpha, double d);

/// Semi-empirical speedup from the verification time share p and the
/// observed processed-feature fraction o: 1 / ((1-p) + p*o).
double expected_speedup(double p_verification_share, double o_fraction_processed);

/// Relative contrast RC_k(q): mean L2 distance from q to the dataset over
/// the distance to its k-th nearest neighbor. Lower is harder.
double relative_contrast(std::span<const float> q, const MatrixF& dataset, std::size_t k);

/// |result intersect truth| / |truth|.
double recall_at_k(std::span<const idx_t> result_ids, std::span<const idx_t> truth_ids);

struct ParetoPoint {
    double recall = 0.0;
    double qps = 0.0;
};

/// Frontier denoising: traverse from high to low recall, keep a point only
/// if its QPS is at least `factor` times the last kept point's QPS. The
/// first point is always kept.
std::vector<ParetoPoint> pareto_denoise(std::vector<ParetoPoint> points, double factor = 1.2);

/// Monotone piecewise-cubic (Fritsch-Carlson) interpolant evaluation at x
/// for knots (xs, ys); xs strictly increasing.
double pchip_eval(const std::vector<double>& xs, const std::vector<double>& ys, double x);

}  // namespace pano
