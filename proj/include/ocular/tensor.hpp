#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace ocular {

// Dense row-major tensor, channel-last (N x H x W x C) for image data.
// All NN computation runs in double precision.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)), data(count(shape), 0.0) {}

    static std::int64_t count(const std::vector<int>& s) {
        std::int64_t n = 1;
        for (int e : s) {
            if (e <= 0) throw std::invalid_argument("tensor extent must be positive, got " + std::to_string(e));
            n *= e;
        }
        return n;
    }

    static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }

    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
    int ndim() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape.at(static_cast<std::size_t>(i)); }

    // 4-d accessor (n, h, w, c)
    double& at4(int n, int h, int w, int c) {
        return data[((static_cast<std::int64_t>(n) * shape[1] + h) * shape[2] + w) * shape[3] + c];
    }
    double at4(int n, int h, int w, int c) const {
        return data[((static_cast<std::int64_t>(n) * shape[1] + h) * shape[2] + w) * shape[3] + c];
    }
    // 2-d accessor (n, f)
    double& at2(int n, int f) { return data[static_cast<std::int64_t>(n) * shape[1] + f]; }
    double at2(int n, int f) const { return data[static_cast<std::int64_t>(n) * shape[1] + f]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    bool all_finite() const;
    void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

std::string shape_str(const std::vector<int>& s);

// Throws if the tensor holds a NaN or Inf.
void require_finite(const Tensor& t, const std::string& where);

}  // namespace ocular
