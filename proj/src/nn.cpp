#include "sicbo/nn.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "sicbo/kernels.hpp"
#include "sicbo/rng.hpp"
#include "sicbo/smoothing.hpp"

namespace sicbo::nn {

void MlpShape::validate() const {
    if (widths.size() < 2) throw std::invalid_argument("network needs at least two layers");
    for (const int w : widths) {
        if (w < 1) throw std::invalid_argument("layer widths must be >= 1");
    }
}

int param_count(const MlpShape& shape) {
    shape.validate();
    int total = 0;
    for (std::size_t l = 1; l < shape.widths.size(); ++l) {
        total += shape.widths[l] * shape.widths[l - 1] + shape.widths[l];
    }
    return total;
}

std::vector<LayerView> unflatten(std::span<const double> params, const MlpShape& shape) {
    if (params.size() != static_cast<std::size_t>(param_count(shape))) {
        throw std::invalid_argument("parameter vector length does not match the shape");
    }
    std::vector<LayerView> layers;
    layers.reserve(shape.widths.size() - 1);
    const double* p = params.data();
    for (std::size_t l = 1; l < shape.widths.size(); ++l) {
        LayerView v;
        v.n_out = shape.widths[l];
        v.n_in = shape.widths[l - 1];
        v.W = p;
        p += v.n_out * v.n_in;
        v.b = p;
        p += v.n_out;
        layers.push_back(v);
    }
    return layers;
}

std::vector<double> forward(std::span<const double> params, const MlpShape& shape,
                            std::span<const double> input, double mu) {
    const auto layers = unflatten(params, shape);
    if (input.size() != static_cast<std::size_t>(shape.widths.front())) {
        throw std::invalid_argument("input length does not match the first layer width");
    }
    std::vector<double> a(input.begin(), input.end());
    std::vector<double> z;
    for (const LayerView& layer : layers) {
        z.assign(static_cast<std::size_t>(layer.n_out), 0.0);
        for (int j = 0; j < layer.n_out; ++j) {
            double acc = layer.b[j];
            const double* wj = layer.W + j * layer.n_in;
            for (int i = 0; i < layer.n_in; ++i) acc += wj[i] * a[static_cast<std::size_t>(i)];
            if (mu > 0.0) {
                z[static_cast<std::size_t>(j)] = phi2_relu(acc, mu);
            } else {
                z[static_cast<std::size_t>(j)] = acc > 0.0 ? acc : 0.0;
            }
        }
        a.swap(z);
    }
    return a;
}

SyntheticDataset generate_dataset(const MlpShape& shape, std::uint64_t teacher_seed,
                                  std::uint64_t sample_seed, double noise_scale, int m_train,
                                  int m_test) {
    shape.validate();
    if (m_train < 0 || m_test < 0 || m_train + m_test < 1) {
        throw std::invalid_argument("dataset needs at least one row");
    }
    const int n0 = shape.widths.front();
    const int nl = shape.widths.back();
    const int rows = m_train + m_test;

    // Teacher stream: flat parameters, then input center, then spread.
    Rng teacher_rng(teacher_seed);
    std::vector<double> teacher(static_cast<std::size_t>(param_count(shape)));
    teacher_rng.normals(teacher.data(), teacher.size());
    std::vector<double> center(static_cast<std::size_t>(n0));
    std::vector<double> spread(static_cast<std::size_t>(n0));
    teacher_rng.normals(center.data(), center.size());
    teacher_rng.normals(spread.data(), spread.size());

    // Sample stream: all input coefficients z_m first, then all output noise.
    Rng sample_rng(sample_seed);
    std::vector<double> z(static_cast<std::size_t>(rows));
    sample_rng.normals(z.data(), z.size());
    std::vector<double> noise(static_cast<std::size_t>(rows) * nl);
    sample_rng.normals(noise.data(), noise.size());

    SyntheticDataset data;
    data.n0 = n0;
    data.nl = nl;
    data.m_train = m_train;
    data.m_test = m_test;
    data.inputs.resize(static_cast<std::size_t>(rows) * n0);
    data.outputs.resize(static_cast<std::size_t>(rows) * nl);
    for (int m = 0; m < rows; ++m) {
        double* u = data.inputs.data() + static_cast<std::size_t>(m) * n0;
        for (int i = 0; i < n0; ++i) {
            u[i] = center[static_cast<std::size_t>(i)] + spread[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(m)];
        }
        const std::vector<double> y = forward(teacher, shape, {u, static_cast<std::size_t>(n0)}, 0.0);
        double* out = data.outputs.data() + static_cast<std::size_t>(m) * nl;
        for (int j = 0; j < nl; ++j) {
            out[j] = y[static_cast<std::size_t>(j)] +
                     noise_scale * noise[static_cast<std::size_t>(m) * nl + j];
        }
    }
    return data;
}

MlpBatchEvaluator::MlpBatchEvaluator(MlpShape shape, const SyntheticDataset& data)
    : shape_(std::move(shape)), m_train_(data.m_train), m_test_(data.m_test) {
    shape_.validate();
    if (data.n0 != shape_.widths.front() || data.nl != shape_.widths.back()) {
        throw std::invalid_argument("dataset widths do not match the network shape");
    }
    max_width_ = 0;
    for (const int w : shape_.widths) max_width_ = std::max(max_width_, w);

    const auto transpose = [](const double* src, int cols, int row0, int nrows,
                              std::vector<double>& dst) {
        dst.assign(static_cast<std::size_t>(cols) * nrows, 0.0);
        for (int r = 0; r < nrows; ++r) {
            for (int c = 0; c < cols; ++c) {
                dst[static_cast<std::size_t>(c) * nrows + r] =
                    src[static_cast<std::size_t>(row0 + r) * cols + c];
            }
        }
    };
    transpose(data.inputs.data(), data.n0, 0, m_train_, train_in_);
    transpose(data.outputs.data(), data.nl, 0, m_train_, train_out_);
    transpose(data.inputs.data(), data.n0, m_train_, m_test_, test_in_);
    transpose(data.outputs.data(), data.nl, m_train_, m_test_, test_out_);
}

double MlpBatchEvaluator::mse(std::span<const double> params, Slice slice, double mu) const {
    const int nb = slice == Slice::Train ? m_train_ : m_test_;
    if (nb == 0) throw std::invalid_argument("mse over an empty slice");
    const std::vector<double>& in = slice == Slice::Train ? train_in_ : test_in_;
    const std::vector<double>& out = slice == Slice::Train ? train_out_ : test_out_;
    const auto layers = unflatten(params, shape_);

    std::vector<double> a(in.begin(), in.end());
    std::vector<double> z(static_cast<std::size_t>(max_width_) * nb);
    for (const LayerView& layer : layers) {
        kernels::dense_relu_batch(layer.W, layer.b, a.data(), z.data(),
                                  static_cast<std::size_t>(layer.n_out),
                                  static_cast<std::size_t>(layer.n_in),
                                  static_cast<std::size_t>(nb), mu > 0.0 ? mu : 0.0);
        a.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(layer.n_out) * nb);
    }
    const double total = kernels::sq_err(a.data(), out.data(),
                                         static_cast<std::size_t>(shape_.widths.back()) * nb);
    return total / static_cast<double>(nb);
}

double mse_loss(std::span<const double> params, const MlpShape& shape,
                const SyntheticDataset& data, Slice slice, double mu) {
    return MlpBatchEvaluator(shape, data).mse(params, slice, mu);
}

TrainResult train_with_sicbo(const MlpShape& shape, const SyntheticDataset& data,
                             const SicboConfig& config, const StepObserver& observer) {
    const int pcount = param_count(shape);
    if (config.init_box.size() != static_cast<std::size_t>(pcount)) {
        throw std::invalid_argument("config.init_box must have one interval per parameter");
    }
    auto eval = std::make_shared<MlpBatchEvaluator>(shape, data);

    SmoothedObjective objective;
    objective.raw = [eval](std::span<const double> p) { return eval->mse(p, Slice::Train, 0.0); };
    objective.smoothed = [eval](std::span<const double> p, double mu) {
        return eval->mse(p, Slice::Train, mu);
    };

    TrainResult result;
    result.report = run(config, objective, observer);
    const std::vector<double>& c = result.report.final_consensus;
    result.err_train = eval->mse(c, Slice::Train, 0.0);
    if (data.m_test > 0) {
        result.err_test = eval->mse(c, Slice::Test, 0.0);
    }
    return result;
}

void write_dataset_csv(const std::string& path, const SyntheticDataset& data) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (int i = 0; i < data.n0; ++i) out << "u" << i << ",";
    for (int j = 0; j < data.nl; ++j) out << "y" << j << (j + 1 < data.nl ? "," : "\n");
    char buf[32];
    for (int m = 0; m < data.rows(); ++m) {
        for (int i = 0; i < data.n0; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", data.inputs[static_cast<std::size_t>(m) * data.n0 + i]);
            out << buf << ",";
        }
        for (int j = 0; j < data.nl; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", data.outputs[static_cast<std::size_t>(m) * data.nl + j]);
            out << buf << (j + 1 < data.nl ? "," : "\n");
        }
    }
}

SyntheticDataset read_dataset_csv(const std::string& path, int n0, int nl, int m_train) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + path);
    SyntheticDataset data;
    data.n0 = n0;
    data.nl = nl;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
        if (values.size() != static_cast<std::size_t>(n0 + nl)) {
            throw std::runtime_error("bad column count in dataset row");
        }
        data.inputs.insert(data.inputs.end(), values.begin(), values.begin() + n0);
        data.outputs.insert(data.outputs.end(), values.begin() + n0, values.end());
    }
    const int rows = static_cast<int>(data.inputs.size()) / n0;
    if (m_train > rows) throw std::runtime_error("train split larger than the dataset");
    data.m_train = m_train;
    data.m_test = rows - m_train;
    return data;
}

}  // namespace sicbo::nn
