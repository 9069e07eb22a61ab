#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace evsom {

/// Batch-learning grid parameters. xi_init is recorded in run metadata for
/// reference; the operative neighborhood schedule starts at xi_start (the
/// default of 1 keeps a constant Chebyshev radius of one cell).
struct SomParams {
    int rows = 20;
    int cols = 20;
    double lambda_init = 0.9;
    double xi_init = 0.001;
    double xi_start = 1.0;
    int iterations = 2000;
    std::uint64_t seed = 0;  // recorded; training itself is deterministic

    int cells() const { return rows * cols; }
};

struct Schedule {
    double lambda = 0.0;
    int radius = 1;
};

/// lambda(t) = max{0.01, lambda_init (1 - t/T)};
/// radius(t) = max{1, round(xi_start (1 - t/T))}.
Schedule schedules(int t, const SomParams& params);

/// Trained grid of reference vectors plus the per-input cell assignment.
/// Cell (i, j) lives at linear index i * cols + j.
struct SomMap {
    int rows = 0;
    int cols = 0;
    Eigen::MatrixXd refs;          // cells x dim
    std::vector<int> labels;       // input row -> linear cell index
    Eigen::VectorXd bmu_distance;  // input row -> Euclidean distance to BMU
    Eigen::VectorXd error_history; // e(t), t = 1..T
    bool degenerate = false;       // fewer than two distinct inputs

    int cells() const { return rows * cols; }
    int cell_index(int i, int j) const { return i * cols + j; }
    std::pair<int, int> cell_coords(int c) const { return {c / cols, c % cols}; }
};

/// First two principal directions of the input cloud and the standard
/// deviations of the projections onto them.
struct PrincipalAxes {
    Eigen::VectorXd mean;
    Eigen::VectorXd b1, b2;  // unit norm; largest-magnitude coordinate positive
    double sigma1 = 0.0, sigma2 = 0.0;
};

PrincipalAxes principal_axes(const Eigen::MatrixXd& inputs);

/// w_{i,j} = mean + 5 sigma1 b1 (i - I/2)/I + 5 sigma2 b2 (j - J/2)/J,
/// then every input labeled with its BMU. Fewer than two distinct inputs
/// collapse all references to the mean with the degeneracy flag set.
SomMap initialize_map(const Eigen::MatrixXd& inputs, const SomParams& params);

/// Cell minimizing Euclidean distance; ties break to the smallest linear
/// index.
int best_matching_unit(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                       const Eigen::MatrixXd& refs);

/// Reassigns every input to its BMU under the current references.
void assign_all(SomMap& map, const Eigen::MatrixXd& inputs);

/// One batch update with explicit learning coefficient and neighborhood
/// radius:
///   1. inputs are assigned their BMU under the current references;
///   2. each cell averages the inputs whose BMU lies within Chebyshev
///      distance `radius` and moves by lambda toward that average (cells with
///      an empty neighborhood stay put);
///   3. inputs are reassigned under the updated references and the summed
///      Euclidean BMU distance is returned as the epoch error.
double batch_epoch_step(SomMap& map, const Eigen::MatrixXd& inputs, double lambda, int radius);

/// batch_epoch_step driven by the iteration schedules.
double batch_epoch(SomMap& map, const Eigen::MatrixXd& inputs, int t, const SomParams& params);

/// initialize_map followed by `iterations` scheduled batch epochs.
/// Deterministic for fixed inputs and parameters.
SomMap train(const Eigen::MatrixXd& inputs, const SomParams& params);

}  // namespace evsom
