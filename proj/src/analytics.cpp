#include "pano/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace pano {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt2Pi = 2.5066282746310002;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

}  // namespace

double inverse_normal_cdf(double p) {
    PANO_REQUIRE(p > 0.0 && p < 1.0, "inverse_normal_cdf: argument must be in (0,1)");
    // Acklam's rational approximation, then one Halley step
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double dd[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
    }
    double e = normal_cdf(x) - p;
    double u = e * kSqrt2Pi * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

double margin(std::uint64_t i, std::uint64_t k, double sigma, double epsilon) {
    PANO_REQUIRE(sigma >= 0.0, "margin: sigma must be >= 0");
    double arg = static_cast<double>(k) / static_cast<double>(i + 1) + epsilon;
    PANO_REQUIRE(arg > 0.0 && arg < 1.0, "margin: probability argument outside (0,1)");
    if (sigma == 0.0) {
        return 0.0;
    }
    return -sigma * inverse_normal_cdf(arg);
}

double pruning_dimension(double delta, double c0, double alpha, double d) {
    PANO_REQUIRE(delta > 0.0, "pruning_dimension: delta must be positive");
    PANO_REQUIRE(c0 > 0.0, "pruning_dimension: C0 must be positive");
    PANO_REQUIRE(alpha > 0.0, "pruning_dimension: alpha must be positive");
    PANO_REQUIRE(d > 0.0, "pruning_dimension: d must be positive");
    double dims = (d / alpha) * std::max(0.0, std::log(c0 / delta));
    return std::min(dims, d);
}

double expected_cost_fraction(double alpha) {
    PANO_REQUIRE(alpha > 0.0, "expected_cost_fraction: alpha must be positive");
    return 1.0 / alpha;
}

double effective_alpha(double alpha_q, double alpha_x) {
    PANO_REQUIRE(alpha_q >= 0.0 && alpha_x >= 0.0, "effective_alpha: rates must be >= 0");
    return (alpha_q + alpha_x) / 2.0;
}

double expected_speedup(double p_verification_share, double o_fraction_processed) {
    PANO_REQUIRE(p_verification_share >= 0.0 && p_verification_share <= 1.0,
                 "expected_speedup: p must be in [0,1]");
    PANO_REQUIRE(o_fraction_processed > 0.0 && o_fraction_processed <= 1.0,
                 "expected_speedup: o must be in (0,1]");
    return 1.0 / ((1.0 - p_verification_share) + p_verification_share * o_fraction_processed);
}

double relative_contrast(std::span<const float> q, const MatrixF& dataset, std::size_t k) {
    PANO_REQUIRE(dataset.rows > k, "relative_contrast: dataset size must exceed k");
    PANO_REQUIRE(dataset.cols == q.size(), "relative_contrast: dimension mismatch");
    PANO_REQUIRE(k >= 1, "relative_contrast: k must be >= 1");
    std::vector<double> dists(dataset.rows);
    for (std::size_t i = 0; i < dataset.rows; ++i) {
        auto row = dataset.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) {
            double diff = static_cast<double>(q[j]) - static_cast<double>(row[j]);
            acc += diff * diff;
        }
        dists[i] = std::sqrt(acc);
    }
    double mean = std::accumulate(dists.begin(), dists.end(), 0.0) / static_cast<double>(dists.size());
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(k - 1), dists.end());
    double dk = dists[k - 1];
    return mean / dk;
}

double recall_at_k(std::span<const idx_t> result_ids, std::span<const idx_t> truth_ids) {
    PANO_REQUIRE(!truth_ids.empty(), "recall: empty truth set");
    std::vector<idx_t> truth(truth_ids.begin(), truth_ids.end());
    std::sort(truth.begin(), truth.end());
    std::size_t hits = 0;
    for (idx_t id : result_ids) {
        if (std::binary_search(truth.begin(), truth.end(), id)) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::vector<ParetoPoint> pareto_denoise(std::vector<ParetoPoint> points, double factor) {
    PANO_REQUIRE(factor > 1.0, "pareto_denoise: factor must exceed 1");
    if (points.empty()) {
        return points;
    }
    std::stable_sort(points.begin(), points.end(),
                     [](const ParetoPoint& a, const ParetoPoint& b) { return a.recall > b.recall; });
    std::vector<ParetoPoint> kept;
    kept.push_back(points.front());
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i].qps >= kept.back().qps * factor) {
            kept.push_back(points[i]);
        }
    }
    return kept;
}

double pchip_eval(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    PANO_REQUIRE(xs.size() == ys.size() && xs.size() >= 2, "pchip: need >= 2 knots");
    const std::size_t n = xs.size();
    for (std::size_t i = 1; i < n; ++i) {
        PANO_REQUIRE(xs[i] > xs[i - 1], "pchip: knots must be strictly increasing");
    }
    // Fritsch-Carlson derivatives keep the interpolant monotone on monotone data
    std::vector<double> h(n - 1), delta(n - 1), deriv(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = xs[i + 1] - xs[i];
        delta[i] = (ys[i + 1] - ys[i]) / h[i];
    }
    deriv[0] = delta[0];
    deriv[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0) {
            deriv[i] = 0.0;
        } else {
            double w1 = 2.0 * h[i] + h[i - 1];
            double w2 = h[i] + 2.0 * h[i - 1];
            deriv[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    x = std::clamp(x, xs.front(), xs.back());
    std::size_t seg = 0;
    while (seg + 2 < n && x > xs[seg + 1]) {
        ++seg;
    }
    double t = (x - xs[seg]) / h[seg];
    double t2 = t * t, t3 = t2 * t;
    double h00 = 2 * t3 - 3 * t2 + 1;
    double h10 = t3 - 2 * t2 + t;
    double h01 = -2 * t3 + 3 * t2;
    double h11 = t3 - t2;
    return h00 * ys[seg] + h10 * h[seg] * deriv[seg] + h01 * ys[seg + 1] + h11 * h[seg] * deriv[seg + 1];
}

namespace {

CompactionReport estimate_alpha_impl(const MatrixF& coeffs, const std::vector<double>& p_values) {
    PANO_REQUIRE(coeffs.rows >= 1, "estimate_alpha: empty dataset");
    PANO_REQUIRE(coeffs.cols >= 2, "estimate_alpha: dimension must be >= 2");
    const std::size_t d = coeffs.cols;
    CompactionReport report;
    report.p_values = p_values;
    report.mean_tail_ratio.assign(d + 1, 0.0);
    std::vector<double> suffix(d + 1);
    std::size_t usable = 0;
    for (std::size_t i = 0; i < coeffs.rows; ++i) {
        auto row = coeffs.row(i);
        suffix[d] = 0.0;
        for (std::size_t j = d; j-- > 0;) {
            double cj = static_cast<double>(row[j]);
            suffix[j] = suffix[j + 1] + cj * cj;
        }
        if (suffix[0] <= 0.0) {
            continue;
        }
        ++usable;
        for (std::size_t l = 0; l <= d; ++l) {
            report.mean_tail_ratio[l] += suffix[l] / suffix[0];
        }
    }
    PANO_REQUIRE(usable >= 1, "estimate_alpha: no usable vectors");
    for (double& r : report.mean_tail_ratio) {
        r /= static_cast<double>(usable);
    }
    double sum = 0.0;
    std::size_t finite = 0;
    for (double p : p_values) {
        PANO_REQUIRE(p > 0.0 && p < 1.0, "estimate_alpha: p must be in (0,1)");
        auto lp = static_cast<std::size_t>(std::llround(p * static_cast<double>(d)));
        lp = std::clamp<std::size_t>(lp, 1, d - 1);
        double ratio = report.mean_tail_ratio[lp];
        double alpha_p;
        if (ratio <= 0.0) {
            alpha_p = std::numeric_limits<double>::infinity();
            ++report.infinite_alpha_count;
        } else {
            alpha_p = -(static_cast<double>(d) / static_cast<double>(lp)) * std::log(ratio);
            sum += alpha_p;
            ++finite;
        }
        report.alpha_p.push_back(alpha_p);
    }
    report.alpha_hat =
        finite > 0 ? sum / static_cast<double>(finite) : std::numeric_limits<double>::infinity();
    return report;
}

}  // namespace

CompactionReport estimate_alpha(const TransformedDataset& data,
                                const std::vector<double>& p_values) {
    return estimate_alpha_impl(data.coeffs, p_values);
}

CompactionReport estimate_alpha(const MatrixF& transformed_coeffs,
                                const std::vector<double>& p_values) {
    return estimate_alpha_impl(transformed_coeffs, p_values);
}

void CompactionReport::write_csv(std::ostream& out) const {
    out << "ell,mean_tail_ratio\n";
    for (std::size_t l = 0; l < mean_tail_ratio.size(); ++l) {
        out << l << ',' << mean_tail_ratio[l] << '\n';
    }
    out << "# ";
    for (std::size_t i = 0; i < p_values.size(); ++i) {
        out << "alpha_p(" << p_values[i] << ")=" << alpha_p[i] << ' ';
    }
    out << "alpha_hat=" << alpha_hat << " predicted_fraction=" << predicted_fraction() << '\n';
}

}  // namespace pano
