#pragma once

#include <cstring>
#include <filesystem>
#include <string>

#include "poseadapt/core/rng.hpp"
#include "poseadapt/core/tensor.hpp"

namespace testutil {

inline poseadapt::Tensor randn(std::vector<int> shape, poseadapt::Rng& rng) {
    poseadapt::Tensor t(std::move(shape));
    for (long i = 0; i < t.size(); ++i) t[i] = static_cast<poseadapt::real>(rng.normal());
    return t;
}

inline poseadapt::Tensor rand01(std::vector<int> shape, poseadapt::Rng& rng) {
    poseadapt::Tensor t(std::move(shape));
    for (long i = 0; i < t.size(); ++i) t[i] = static_cast<poseadapt::real>(rng.uniform());
    return t;
}

inline bool bitwise_equal(const poseadapt::Tensor& a, const poseadapt::Tensor& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), static_cast<size_t>(a.size()) * sizeof(poseadapt::real)) == 0;
}

inline double max_abs_diff(const poseadapt::Tensor& a, const poseadapt::Tensor& b) {
    double m = 0;
    for (long i = 0; i < a.size(); ++i) {
        const double d = std::fabs(static_cast<double>(a[i] - b[i]));
        if (d > m) m = d;
    }
    return m;
}

/// Unique scratch dir under the build tree; removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = (std::filesystem::temp_directory_path() /
                 ("poseadapt_test_" + tag + "_" + std::to_string(::getpid())))
                    .string();
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    const std::string& path() const { return path_; }
    std::string sub(const std::string& name) const {
        return (std::filesystem::path(path_) / name).string();
    }

private:
    std::string path_;
};

}  // namespace testutil
