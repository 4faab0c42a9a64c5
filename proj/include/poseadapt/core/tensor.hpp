#pragma once

#include <array>
#include <cassert>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace poseadapt {

using real = double;

/// Dense row-major tensor of rank <= 4.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
        long n = 1;
        for (int d : shape_) {
            if (d <= 0) throw std::invalid_argument("Tensor: nonpositive dim");
            n *= d;
        }
        data_.assign(static_cast<size_t>(n), real(0));
    }

    static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape_); }

    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    const std::vector<int>& shape() const { return shape_; }
    long size() const { return static_cast<long>(data_.size()); }
    bool empty() const { return data_.empty(); }

    real* data() { return data_.data(); }
    const real* data() const { return data_.data(); }

    real& operator[](long i) { return data_[static_cast<size_t>(i)]; }
    real operator[](long i) const { return data_[static_cast<size_t>(i)]; }

    real& at2(int a, int b) {
        return data_[static_cast<size_t>(a) * dim(1) + b];
    }
    real at2(int a, int b) const {
        return data_[static_cast<size_t>(a) * dim(1) + b];
    }
    real& at3(int a, int b, int c) {
        return data_[(static_cast<size_t>(a) * dim(1) + b) * dim(2) + c];
    }
    real at3(int a, int b, int c) const {
        return data_[(static_cast<size_t>(a) * dim(1) + b) * dim(2) + c];
    }
    real& at4(int a, int b, int c, int d) {
        return data_[((static_cast<size_t>(a) * dim(1) + b) * dim(2) + c) * dim(3) + d];
    }
    real at4(int a, int b, int c, int d) const {
        return data_[((static_cast<size_t>(a) * dim(1) + b) * dim(2) + c) * dim(3) + d];
    }

    void fill(real v) { std::fill(data_.begin(), data_.end(), v); }
    void zero() { fill(real(0)); }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    std::string shape_str() const {
        std::string s = "[";
        for (size_t i = 0; i < shape_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape_[i]);
        }
        return s + "]";
    }

private:
    std::vector<int> shape_;
    std::vector<real> data_;
};

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* where) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(where) + ": shape mismatch " +
                                    a.shape_str() + " vs " + b.shape_str());
}

}  // namespace poseadapt
