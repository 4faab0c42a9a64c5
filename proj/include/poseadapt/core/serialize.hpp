#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "poseadapt/core/tensor.hpp"

namespace poseadapt {

/// Self-describing checkpoint container: a JSON header (free-form "meta"
/// plus a tensor index with names and shapes) followed by the tensor data
/// as little-endian 32-bit floats, concatenated in index order.
struct NamedTensorView {
    std::string name;
    const Tensor* tensor;
};

struct Container {
    nlohmann::ordered_json meta;
    std::map<std::string, Tensor> tensors;

    const Tensor& require(const std::string& name) const;
};

void write_container(const std::string& path, const nlohmann::ordered_json& meta,
                     const std::vector<NamedTensorView>& tensors);

Container read_container(const std::string& path);

}  // namespace poseadapt
