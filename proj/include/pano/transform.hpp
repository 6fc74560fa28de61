#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pano/common.hpp"

namespace pano {

/// Free parameters of a skew-symmetric matrix A: the strict upper triangle,
/// row-major, d(d-1)/2 values. A is reconstructed with A^T = -A and a zero
/// diagonal.
struct SkewParams {
    std::size_t dim = 0;
    std::vector<double> upper;

    static SkewParams zeros(std::size_t dim) {
        return {dim, std::vector<double>(dim * (dim - 1) / 2, 0.0)};
    }
    std::size_t param_count() const { return dim * (dim - 1) / 2; }
};

/// The learned orthogonal operator: Cayley factor T(A) composed with the
/// PCA warm-start basis T'. `matrix` is the published f32 operator T(A)*T'.
struct TransformModel {
    std::size_t dim = 0;
    double gamma = 1.0;
    SkewParams skew;
    MatrixF warm_start;  // d x d orthogonal basis (rows = components)
    MatrixF matrix;      // d x d composed operator
    std::uint64_t seed = 0;

    /// Identity operator of the given dimension (no compaction).
    static TransformModel identity(std::size_t dim);

    /// y = matrix * x, accumulated in doubles, stored f32.
    std::vector<float> apply(std::span<const float> x) const;
    MatrixF apply(const MatrixF& data) const;

    /// max-abs deviation of matrix^T * matrix from identity.
    double orthogonality_error() const;
};

struct TrainConfig {
    double alpha_target = 8.0;
    double gamma = 1.0;
    double learning_rate = 0.001;
    int max_epochs = 100;
    int patience = 10;            // early stop after this many non-improving epochs
    int lr_decay_window = 5;      // halve lr after this many consecutive non-improving epochs
    double lr_decay_factor = 0.5;
    double train_fraction = 0.30;
    double val_fraction = 0.10;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Cayley map T = (I - (gamma/2)A)^(-1)(I + (gamma/2)A); always orthogonal
/// for skew-symmetric A.
MatrixD cayley_map(const SkewParams& skew, double gamma);

/// Rows are eigenvectors of the mean-centered covariance of `data`, sorted
/// by descending eigenvalue. Centering is used for basis estimation only;
/// the basis is applied to vectors without mean subtraction.
MatrixD pca_basis(const MatrixF& data);

/// Mean squared deviation of normalized residual energies from the target
/// exponential decay exp(-alpha*l/d), per dimension, averaged over vectors.
/// Zero vectors are skipped; an all-zero dataset is an error.
double compaction_loss(const TransformModel& model, const MatrixF& data, double alpha_target);

/// Analytic gradient of compaction_loss with respect to the free skew
/// parameters.
std::vector<double> loss_gradient(const TransformModel& model, const MatrixF& data,
                                  double alpha_target);

struct TrainReport {
    double warm_start_train_loss = 0.0;
    double final_train_loss = 0.0;
    double best_val_loss = 0.0;
    int epochs_run = 0;
    bool fell_back_to_warm_start = false;
};

/// Full training pipeline: deterministic split, PCA warm start, Adam on the
/// skew parameters with early stopping on validation loss.
TransformModel train_transform(const MatrixF& data, const TrainConfig& config,
                               TrainReport* report = nullptr);

}  // namespace pano
