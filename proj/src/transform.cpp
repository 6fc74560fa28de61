#include "pano/transform.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace pano {

namespace {

using EMatrix = Eigen::MatrixXd;
using EVector = Eigen::VectorXd;

EMatrix to_eigen(const MatrixD& m) {
    EMatrix out(m.rows, m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m.at(i, j);
        }
    }
    return out;
}

MatrixD from_eigen(const EMatrix& m) {
    MatrixD out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = m(i, j);
        }
    }
    return out;
}

EMatrix skew_to_dense(const SkewParams& skew) {
    const auto d = static_cast<Eigen::Index>(skew.dim);
    EMatrix a = EMatrix::Zero(d, d);
    std::size_t idx = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            a(i, j) = skew.upper[idx];
            a(j, i) = -skew.upper[idx];
            ++idx;
        }
    }
    return a;
}

EMatrix cayley_from_dense(const EMatrix& a, double gamma) {
    const double c = gamma / 2.0;
    const Eigen::Index d = a.rows();
    EMatrix p = EMatrix::Identity(d, d) - c * a;
    EMatrix q = EMatrix::Identity(d, d) + c * a;
    EMatrix t = p.partialPivLu().solve(q);
    PANO_ASSERT(t.allFinite(), "cayley: linear solve produced non-finite values");
    return t;
}

EMatrix data_to_eigen(const MatrixF& data) {
    EMatrix out(static_cast<Eigen::Index>(data.rows), static_cast<Eigen::Index>(data.cols));
    for (std::size_t i = 0; i < data.rows; ++i) {
        for (std::size_t j = 0; j < data.cols; ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                static_cast<double>(data.at(i, j));
        }
    }
    return out;
}

/// Loss over pre-rotated rows Y (already multiplied by the warm start):
/// rows of Z = Y * T^T give the fully transformed coefficients. Returns the
/// mean per-dimension squared deviation of normalized residual energies
/// from exp(-alpha l / d); optionally accumulates dL/dZ for the backward
/// pass. Rows with zero energy are skipped.
double residual_decay_loss(const EMatrix& z, double alpha, EMatrix* zbar) {
    const Eigen::Index n = z.rows();
    const Eigen::Index d = z.cols();
    if (zbar) {
        *zbar = EMatrix::Zero(n, d);
    }
    std::vector<double> targets(static_cast<std::size_t>(d));
    for (Eigen::Index l = 0; l < d; ++l) {
        targets[static_cast<std::size_t>(l)] =
            std::exp(-alpha * static_cast<double>(l) / static_cast<double>(d));
    }
    double total = 0.0;
    Eigen::Index usable = 0;
    std::vector<double> suffix(static_cast<std::size_t>(d) + 1);
    std::vector<double> g(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < n; ++i) {
        suffix[static_cast<std::size_t>(d)] = 0.0;
        for (Eigen::Index j = d; j-- > 0;) {
            double zij = z(i, j);
            suffix[static_cast<std::size_t>(j)] = suffix[static_cast<std::size_t>(j) + 1] + zij * zij;
        }
        const double r0 = suffix[0];
        if (r0 <= 0.0) {
            continue;  // zero vector carries no energy to compact
        }
        ++usable;
        double loss_i = 0.0;
        double g0 = 0.0;
        for (Eigen::Index l = 1; l < d; ++l) {
            double ratio = suffix[static_cast<std::size_t>(l)] / r0;
            double err = ratio - targets[static_cast<std::size_t>(l)];
            loss_i += err * err;
            if (zbar) {
                double coeff = 2.0 / static_cast<double>(d) * err;
                g[static_cast<std::size_t>(l)] = coeff / r0;
                g0 -= coeff * suffix[static_cast<std::size_t>(l)] / (r0 * r0);
            }
        }
        total += loss_i / static_cast<double>(d);
        if (zbar) {
            g[0] = g0;
            double prefix = 0.0;
            for (Eigen::Index j = 0; j < d; ++j) {
                prefix += g[static_cast<std::size_t>(j)];
                (*zbar)(i, j) = 2.0 * z(i, j) * prefix;
            }
        }
    }
    PANO_REQUIRE(usable > 0, "compaction loss: no usable vectors");
    if (zbar) {
        *zbar /= static_cast<double>(usable);
    }
    return total / static_cast<double>(usable);
}

std::vector<double> project_to_upper(const EMatrix& grad_a) {
    const Eigen::Index d = grad_a.rows();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(d * (d - 1) / 2));
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            out.push_back(grad_a(i, j) - grad_a(j, i));
        }
    }
    return out;
}

struct LossContext {
    EMatrix y;      // warm-rotated data rows
    EMatrix warm;   // double view of the published warm start
    double gamma = 1.0;
    double alpha = 8.0;

    double loss(const EMatrix& t) const {
        EMatrix z = y * t.transpose();
        return residual_decay_loss(z, alpha, nullptr);
    }

    std::vector<double> gradient(const SkewParams& skew, const EMatrix& t) const {
        const double c = gamma / 2.0;
        EMatrix z = y * t.transpose();
        EMatrix zbar;
        residual_decay_loss(z, alpha, &zbar);
        EMatrix g_t = zbar.transpose() * y;  // dL/dT
        EMatrix a = skew_to_dense(skew);
        EMatrix p = EMatrix::Identity(a.rows(), a.cols()) - c * a;
        EMatrix g_a = c * p.transpose().partialPivLu().solve(
                              g_t * (EMatrix::Identity(a.rows(), a.cols()) + t.transpose()));
        return project_to_upper(g_a);
    }
};

}  // namespace

void TrainConfig::validate() const {
    PANO_REQUIRE(alpha_target > 0.0, "train: alpha target must be positive");
    PANO_REQUIRE(gamma > 0.0, "train: gamma must be positive");
    PANO_REQUIRE(learning_rate > 0.0, "train: learning rate must be positive");
    PANO_REQUIRE(max_epochs >= 0, "train: max epochs must be >= 0");
    PANO_REQUIRE(patience >= 1, "train: patience must be >= 1");
    PANO_REQUIRE(lr_decay_window >= 1, "train: lr decay window must be >= 1");
    PANO_REQUIRE(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0, "train: bad lr decay factor");
    PANO_REQUIRE(train_fraction > 0.0 && train_fraction <= 1.0, "train: bad train fraction");
    PANO_REQUIRE(val_fraction > 0.0 && val_fraction <= 1.0, "train: bad val fraction");
    PANO_REQUIRE(train_fraction + val_fraction <= 1.0, "train: fractions exceed 1");
}

TransformModel TransformModel::identity(std::size_t dim) {
    TransformModel model;
    model.dim = dim;
    model.gamma = 1.0;
    model.skew = SkewParams::zeros(dim);
    model.warm_start = MatrixD::identity(dim).to_float();
    model.matrix = model.warm_start;
    return model;
}

std::vector<float> TransformModel::apply(std::span<const float> x) const {
    PANO_REQUIRE(x.size() == dim, "transform: dimension mismatch");
    std::vector<float> out(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        double acc = 0.0;
        const float* row = matrix.row(i).data();
        for (std::size_t j = 0; j < dim; ++j) {
            acc += static_cast<double>(row[j]) * static_cast<double>(x[j]);
        }
        out[i] = static_cast<float>(acc);
    }
    return out;
}

MatrixF TransformModel::apply(const MatrixF& data) const {
    PANO_REQUIRE(data.cols == dim, "transform: dimension mismatch");
    MatrixF out(data.rows, data.cols);
    for (std::size_t i = 0; i < data.rows; ++i) {
        auto row = apply(data.row(i));
        std::copy(row.begin(), row.end(), out.row(i).begin());
    }
    return out;
}

double TransformModel::orthogonality_error() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            double acc = 0.0;
            for (std::size_t r = 0; r < dim; ++r) {
                acc += static_cast<double>(matrix.at(r, i)) * static_cast<double>(matrix.at(r, j));
            }
            double target = (i == j) ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(acc - target));
        }
    }
    return worst;
}

MatrixD cayley_map(const SkewParams& skew, double gamma) {
    PANO_REQUIRE(skew.dim >= 1, "cayley: dimension must be >= 1");
    PANO_REQUIRE(skew.upper.size() == skew.param_count(), "cayley: wrong parameter count");
    return from_eigen(cayley_from_dense(skew_to_dense(skew), gamma));
}

MatrixD pca_basis(const MatrixF& data) {
    PANO_REQUIRE(data.rows >= 2, "pca: need at least 2 vectors");
    PANO_REQUIRE(data.cols >= 1, "pca: dimension must be >= 1");
    EMatrix x = data_to_eigen(data);
    Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    EMatrix cov = (x.transpose() * x) / static_cast<double>(data.rows - 1);
    Eigen::SelfAdjointEigenSolver<EMatrix> solver(cov);
    PANO_ASSERT(solver.info() == Eigen::Success, "pca: eigendecomposition failed");
    // columns come sorted by ascending eigenvalue; emit rows by descending
    const Eigen::Index d = cov.rows();
    MatrixD basis(static_cast<std::size_t>(d), static_cast<std::size_t>(d));
    for (Eigen::Index r = 0; r < d; ++r) {
        EVector v = solver.eigenvectors().col(d - 1 - r);
        for (Eigen::Index j = 0; j < d; ++j) {
            basis.at(static_cast<std::size_t>(r), static_cast<std::size_t>(j)) = v(j);
        }
    }
    return basis;
}

double compaction_loss(const TransformModel& model, const MatrixF& data, double alpha_target) {
    PANO_REQUIRE(data.cols == model.dim, "loss: dimension mismatch");
    PANO_REQUIRE(alpha_target > 0.0, "loss: alpha target must be positive");
    LossContext ctx;
    ctx.warm = to_eigen(MatrixD::from_float(model.warm_start));
    ctx.y = data_to_eigen(data) * ctx.warm.transpose();
    ctx.gamma = model.gamma;
    ctx.alpha = alpha_target;
    return ctx.loss(cayley_from_dense(skew_to_dense(model.skew), model.gamma));
}

std::vector<double> loss_gradient(const TransformModel& model, const MatrixF& data,
                                  double alpha_target) {
    PANO_REQUIRE(data.cols == model.dim, "gradient: dimension mismatch");
    PANO_REQUIRE(alpha_target > 0.0, "gradient: alpha target must be positive");
    LossContext ctx;
    ctx.warm = to_eigen(MatrixD::from_float(model.warm_start));
    ctx.y = data_to_eigen(data) * ctx.warm.transpose();
    ctx.gamma = model.gamma;
    ctx.alpha = alpha_target;
    return ctx.gradient(model.skew, cayley_from_dense(skew_to_dense(model.skew), model.gamma));
}

TransformModel train_transform(const MatrixF& data, const TrainConfig& config,
                               TrainReport* report) {
    config.validate();
    const std::size_t n = data.rows;
    const std::size_t d = data.cols;
    PANO_REQUIRE(d >= 2, "train: dimension must be >= 2");
    const auto n_train = static_cast<std::size_t>(std::llround(config.train_fraction * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::llround(config.val_fraction * static_cast<double>(n)));
    PANO_REQUIRE(n_train >= 10 && n_val >= 10, "train: dataset too small for the configured split");
    PANO_REQUIRE(n_train + n_val <= n, "train: dataset too small for the configured split");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(config.seed);
    std::shuffle(order.begin(), order.end(), rng);

    MatrixF train_data(n_train, d);
    MatrixF val_data(n_val, d);
    for (std::size_t i = 0; i < n_train; ++i) {
        auto src = data.row(order[i]);
        std::copy(src.begin(), src.end(), train_data.row(i).begin());
    }
    for (std::size_t i = 0; i < n_val; ++i) {
        auto src = data.row(order[n_train + i]);
        std::copy(src.begin(), src.end(), val_data.row(i).begin());
    }

    // publish the warm start in f32 and train against that exact operator
    MatrixF warm_f = pca_basis(train_data).to_float();
    EMatrix warm = to_eigen(MatrixD::from_float(warm_f));

    LossContext train_ctx{data_to_eigen(train_data) * warm.transpose(), warm, config.gamma,
                          config.alpha_target};
    LossContext val_ctx{data_to_eigen(val_data) * warm.transpose(), warm, config.gamma,
                        config.alpha_target};

    SkewParams params = SkewParams::zeros(d);
    const std::size_t n_params = params.param_count();

    EMatrix t = EMatrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    const double warm_train_loss = train_ctx.loss(t);
    const double warm_val_loss = val_ctx.loss(t);

    SkewParams best = params;
    double best_val = warm_val_loss;
    double best_train = warm_train_loss;

    std::vector<double> m(n_params, 0.0), v(n_params, 0.0);
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    double lr = config.learning_rate;
    int bad_streak = 0;
    int epochs_run = 0;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        epochs_run = epoch;
        std::vector<double> grad = train_ctx.gradient(params, t);
        const double bc1 = 1.0 - std::pow(beta1, epoch);
        const double bc2 = 1.0 - std::pow(beta2, epoch);
        for (std::size_t p = 0; p < n_params; ++p) {
            m[p] = beta1 * m[p] + (1.0 - beta1) * grad[p];
            v[p] = beta2 * v[p] + (1.0 - beta2) * grad[p] * grad[p];
            params.upper[p] -= lr * (m[p] / bc1) / (std::sqrt(v[p] / bc2) + eps);
        }
        t = cayley_from_dense(skew_to_dense(params), config.gamma);
        const double train_loss = train_ctx.loss(t);
        const double val_loss = val_ctx.loss(t);
        PANO_ASSERT(std::isfinite(train_loss) && std::isfinite(val_loss),
                    "train: non-finite loss; lower the learning rate");
        if (val_loss < best_val) {
            best_val = val_loss;
            best = params;
            best_train = train_loss;
            bad_streak = 0;
        } else {
            ++bad_streak;
            if (bad_streak >= config.patience) {
                break;
            }
            if (bad_streak % config.lr_decay_window == 0) {
                lr *= config.lr_decay_factor;
            }
        }
    }

    bool fell_back = false;
    if (best_train > warm_train_loss) {
        best = SkewParams::zeros(d);
        best_train = warm_train_loss;
        best_val = warm_val_loss;
        fell_back = true;
    }

    TransformModel model;
    model.dim = d;
    model.gamma = config.gamma;
    model.seed = config.seed;
    model.skew = best;
    model.warm_start = warm_f;
    EMatrix t_best = cayley_from_dense(skew_to_dense(best), config.gamma);
    model.matrix = from_eigen(t_best * warm).to_float();
    PANO_ASSERT(model.orthogonality_error() <= 1e-4,
                "train: published matrix failed the orthogonality check");

    if (report) {
        report->warm_start_train_loss = warm_train_loss;
        report->final_train_loss = best_train;
        report->best_val_loss = best_val;
        report->epochs_run = epochs_run;
        report->fell_back_to_warm_start = fell_back;
    }
    return model;
}

}  // namespace pano
