#include "evsom/som.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace evsom {

Schedule schedules(int t, const SomParams& params) {
    if (t < 1 || t > params.iterations) {
        throw std::invalid_argument("schedules: t out of range 1..T");
    }
    const double frac = 1.0 - static_cast<double>(t) / static_cast<double>(params.iterations);
    Schedule s;
    s.lambda = std::max(0.01, params.lambda_init * frac);
    s.radius = std::max(1, static_cast<int>(std::lround(params.xi_start * frac)));
    return s;
}

namespace {

// Orient a unit vector so its largest-magnitude coordinate is positive; the
// first maximal coordinate decides, keeping the sign rule deterministic.
void fix_sign(Eigen::VectorXd& v) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        const double a = std::abs(v[k]);
        if (a > best) {
            best = a;
            arg = k;
        }
    }
    if (v[arg] < 0.0) v = -v;
}

// Squared distances of every input to every reference via one product:
// d2(k, c) = |x_k|^2 - 2 x_k . w_c + |w_c|^2.
void assign_impl(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& refs,
                 std::vector<int>& labels, Eigen::VectorXd& distance) {
    const Eigen::Index n = inputs.rows();
    const Eigen::Index cells = refs.rows();
    const Eigen::MatrixXd cross = inputs * refs.transpose();
    const Eigen::VectorXd ref_norm = refs.rowwise().squaredNorm();
    const Eigen::VectorXd in_norm = inputs.rowwise().squaredNorm();

    labels.resize(static_cast<std::size_t>(n));
    distance.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        int best_cell = 0;
        double best_d2 = in_norm[k] - 2.0 * cross(k, 0) + ref_norm[0];
        for (Eigen::Index c = 1; c < cells; ++c) {
            const double d2 = in_norm[k] - 2.0 * cross(k, c) + ref_norm[c];
            if (d2 < best_d2) {
                best_d2 = d2;
                best_cell = static_cast<int>(c);
            }
        }
        labels[static_cast<std::size_t>(k)] = best_cell;
        distance[k] = std::sqrt(std::max(0.0, best_d2));
    }
}

}  // namespace

PrincipalAxes principal_axes(const Eigen::MatrixXd& inputs) {
    const Eigen::Index n = inputs.rows();
    const Eigen::Index dim = inputs.cols();
    if (n < 2) throw std::invalid_argument("principal_axes: need at least 2 inputs");
    if (dim < 1) throw std::invalid_argument("principal_axes: need dimension >= 1");

    PrincipalAxes axes;
    axes.mean = inputs.colwise().mean();
    const Eigen::MatrixXd centered = inputs.rowwise() - axes.mean.transpose();
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("principal_axes: eigendecomposition failed");
    }
    // Eigenvalues come back ascending.
    axes.b1 = solver.eigenvectors().col(dim - 1);
    axes.sigma1 = std::sqrt(std::max(0.0, solver.eigenvalues()[dim - 1]));
    if (dim >= 2) {
        axes.b2 = solver.eigenvectors().col(dim - 2);
        axes.sigma2 = std::sqrt(std::max(0.0, solver.eigenvalues()[dim - 2]));
    } else {
        axes.b2 = Eigen::VectorXd::Zero(dim);
        axes.sigma2 = 0.0;
    }
    fix_sign(axes.b1);
    fix_sign(axes.b2);
    return axes;
}

SomMap initialize_map(const Eigen::MatrixXd& inputs, const SomParams& params) {
    if (params.rows < 1 || params.cols < 1) {
        throw std::invalid_argument("initialize_map: grid dimensions must be >= 1");
    }
    const Eigen::Index n = inputs.rows();
    const Eigen::Index dim = inputs.cols();
    if (n < 2) throw std::invalid_argument("initialize_map: need at least 2 inputs");

    SomMap map;
    map.rows = params.rows;
    map.cols = params.cols;
    map.refs.resize(params.cells(), dim);

    bool distinct = false;
    for (Eigen::Index k = 1; k < n && !distinct; ++k) {
        distinct = (inputs.row(k).array() != inputs.row(0).array()).any();
    }

    if (!distinct) {
        const Eigen::RowVectorXd mean = inputs.colwise().mean();
        map.refs.rowwise() = mean;
        map.degenerate = true;
        assign_all(map, inputs);
        return map;
    }

    const PrincipalAxes axes = principal_axes(inputs);
    const double half_i = static_cast<double>(params.rows) / 2.0;
    const double half_j = static_cast<double>(params.cols) / 2.0;
    for (int i = 0; i < params.rows; ++i) {
        const double si = (static_cast<double>(i) - half_i) / static_cast<double>(params.rows);
        for (int j = 0; j < params.cols; ++j) {
            const double sj = (static_cast<double>(j) - half_j) / static_cast<double>(params.cols);
            map.refs.row(map.cell_index(i, j)) =
                (axes.mean + 5.0 * axes.sigma1 * si * axes.b1 + 5.0 * axes.sigma2 * sj * axes.b2)
                    .transpose();
        }
    }
    assign_all(map, inputs);
    return map;
}

int best_matching_unit(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                       const Eigen::MatrixXd& refs) {
    if (x.size() != refs.cols()) {
        throw std::invalid_argument("best_matching_unit: dimension mismatch");
    }
    int best_cell = 0;
    double best_d2 = (x - refs.row(0)).squaredNorm();
    for (Eigen::Index c = 1; c < refs.rows(); ++c) {
        const double d2 = (x - refs.row(c)).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best_cell = static_cast<int>(c);
        }
    }
    return best_cell;
}

void assign_all(SomMap& map, const Eigen::MatrixXd& inputs) {
    if (inputs.cols() != map.refs.cols()) {
        throw std::invalid_argument("assign_all: dimension mismatch");
    }
    assign_impl(inputs, map.refs, map.labels, map.bmu_distance);
}

double batch_epoch_step(SomMap& map, const Eigen::MatrixXd& inputs, double lambda, int radius) {
    const Eigen::Index dim = map.refs.cols();
    if (inputs.cols() != dim) throw std::invalid_argument("batch_epoch_step: dimension mismatch");
    if (radius < 0) throw std::invalid_argument("batch_epoch_step: negative radius");

    assign_all(map, inputs);

    // Per-cell input sums keyed by BMU.
    Eigen::MatrixXd cell_sum = Eigen::MatrixXd::Zero(map.cells(), dim);
    Eigen::VectorXi cell_count = Eigen::VectorXi::Zero(map.cells());
    for (Eigen::Index k = 0; k < inputs.rows(); ++k) {
        const int c = map.labels[static_cast<std::size_t>(k)];
        cell_sum.row(c) += inputs.row(k);
        cell_count[c] += 1;
    }

    // Chebyshev-box neighborhood average; empty neighborhoods freeze the cell.
    Eigen::RowVectorXd acc(dim);
    for (int i = 0; i < map.rows; ++i) {
        for (int j = 0; j < map.cols; ++j) {
            acc.setZero();
            int n_members = 0;
            const int i_lo = std::max(0, i - radius), i_hi = std::min(map.rows - 1, i + radius);
            const int j_lo = std::max(0, j - radius), j_hi = std::min(map.cols - 1, j + radius);
            for (int ii = i_lo; ii <= i_hi; ++ii) {
                for (int jj = j_lo; jj <= j_hi; ++jj) {
                    const int c = map.cell_index(ii, jj);
                    acc += cell_sum.row(c);
                    n_members += cell_count[c];
                }
            }
            if (n_members == 0) continue;
            const int c = map.cell_index(i, j);
            map.refs.row(c) +=
                lambda * (acc / static_cast<double>(n_members) - map.refs.row(c));
        }
    }

    assign_all(map, inputs);
    return map.bmu_distance.sum();
}

double batch_epoch(SomMap& map, const Eigen::MatrixXd& inputs, int t, const SomParams& params) {
    const Schedule s = schedules(t, params);
    return batch_epoch_step(map, inputs, s.lambda, s.radius);
}

SomMap train(const Eigen::MatrixXd& inputs, const SomParams& params) {
    if (params.iterations < 1) throw std::invalid_argument("train: iterations must be >= 1");
    SomMap map = initialize_map(inputs, params);
    map.error_history.resize(params.iterations);
    for (int t = 1; t <= params.iterations; ++t) {
        map.error_history[t - 1] = batch_epoch(map, inputs, t, params);
    }
    return map;
}

}  // namespace evsom
