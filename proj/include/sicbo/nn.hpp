#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sicbo/solver.hpp"

// Gradient-free training of a small fully-connected ReLU network on
// synthetic teacher data. Parameters travel as one flat vector so the solver
// can treat the network as a black-box objective. Forward passes for the N
// particles within a solver step are independent; the dataset is immutable
// shared state.

namespace sicbo::nn {

struct MlpShape {
    std::vector<int> widths;  // [N0, N1, ..., NL], all >= 1

    void validate() const;
    int layers() const { return static_cast<int>(widths.size()) - 1; }
};

// Total parameter count: sum over layers of N_l * N_{l-1} + N_l.
int param_count(const MlpShape& shape);

// Flat packing (W1 row-major, b1, W2, b2, ...). flatten/unflatten round-trip
// exactly.
struct LayerView {
    const double* W;  // n_out x n_in, row-major
    const double* b;  // n_out
    int n_out, n_in;
};
std::vector<LayerView> unflatten(std::span<const double> params, const MlpShape& shape);

// Layered affine + activation map for one input. mu == 0 applies exact ReLU,
// mu > 0 the quadratic-capped smoothing; the output layer is activated too.
std::vector<double> forward(std::span<const double> params, const MlpShape& shape,
                            std::span<const double> input, double mu);

struct SyntheticDataset {
    int n0 = 0, nl = 0;
    int m_train = 0, m_test = 0;
    std::vector<double> inputs;   // (m_train+m_test) x n0, row-major, train first
    std::vector<double> outputs;  // (m_train+m_test) x nl

    int rows() const { return m_train + m_test; }
};

// Teacher data: parameters, input center and spread drawn as standard
// normals from teacher_seed; inputs u_m = xi + Sigma*z_m with scalar z_m and
// Gaussian output noise drawn from sample_seed.
SyntheticDataset generate_dataset(const MlpShape& shape, std::uint64_t teacher_seed,
                                  std::uint64_t sample_seed, double noise_scale = 0.05,
                                  int m_train = 80, int m_test = 20);

enum class Slice { Train, Test };

// Mean squared error over the slice; mu selects the smoothed or exact
// forward pass. Batched over samples through the kernel layer.
double mse_loss(std::span<const double> params, const MlpShape& shape,
                const SyntheticDataset& data, Slice slice, double mu);

// Prepared neuron-major views of the dataset for repeated loss evaluations.
class MlpBatchEvaluator {
public:
    MlpBatchEvaluator(MlpShape shape, const SyntheticDataset& data);

    double mse(std::span<const double> params, Slice slice, double mu) const;
    const MlpShape& shape() const { return shape_; }
    int train_rows() const { return m_train_; }
    int test_rows() const { return m_test_; }

private:
    MlpShape shape_;
    int m_train_, m_test_;
    std::vector<double> train_in_, train_out_;  // neuron-major: [neuron][sample]
    std::vector<double> test_in_, test_out_;
    int max_width_;
};

struct TrainResult {
    RunReport report;
    double err_train = 0.0;
    std::optional<double> err_test;  // absent when the test slice is empty
};

// Wraps the smoothed train loss as the solver objective (init box must be
// P-dimensional), runs SICBO and evaluates exact-ReLU errors at the final
// consensus point.
TrainResult train_with_sicbo(const MlpShape& shape, const SyntheticDataset& data,
                             const SicboConfig& config, const StepObserver& observer = {});

// CSV exchange format: header, then one row per sample (n0 input columns,
// nl output columns), train rows first.
void write_dataset_csv(const std::string& path, const SyntheticDataset& data);
SyntheticDataset read_dataset_csv(const std::string& path, int n0, int nl, int m_train);

}  // namespace sicbo::nn
