#include "poseadapt/core/serialize.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace poseadapt {

namespace {
constexpr char kMagic[4] = {'P', 'A', 'D', 'K'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void write_f32(std::ostream& os, float v) {
    uint32_t u;
    std::memcpy(&u, &v, 4);
    write_u32(os, u);
}

float read_f32(std::istream& is) {
    const uint32_t u = read_u32(is);
    float v;
    std::memcpy(&v, &u, 4);
    return v;
}
}  // namespace

const Tensor& Container::require(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end())
        throw std::runtime_error("checkpoint: missing tensor '" + name + "'");
    return it->second;
}

void write_container(const std::string& path, const nlohmann::ordered_json& meta,
                     const std::vector<NamedTensorView>& tensors) {
    nlohmann::ordered_json header;
    header["format"] = "poseadapt-container";
    header["meta"] = meta;
    nlohmann::ordered_json index = nlohmann::ordered_json::array();
    for (const auto& t : tensors) {
        nlohmann::ordered_json e;
        e["name"] = t.name;
        e["shape"] = t.tensor->shape();
        e["dtype"] = "f32";
        index.push_back(e);
    }
    header["tensors"] = index;
    const std::string hs = header.dump();

    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_container: cannot open " + path);
    os.write(kMagic, 4);
    write_u32(os, kVersion);
    write_u32(os, static_cast<uint32_t>(hs.size()));
    os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& t : tensors)
        for (long i = 0; i < t.tensor->size(); ++i)
            write_f32(os, static_cast<float>((*t.tensor)[i]));
    if (!os) throw std::runtime_error("write_container: write failed for " + path);
}

Container read_container(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_container: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("read_container: bad magic in " + path);
    const uint32_t version = read_u32(is);
    if (version != kVersion)
        throw std::runtime_error("read_container: unsupported version in " + path);
    const uint32_t hlen = read_u32(is);
    std::string hs(hlen, '\0');
    is.read(hs.data(), hlen);
    if (!is) throw std::runtime_error("read_container: truncated header in " + path);
    const auto header = nlohmann::ordered_json::parse(hs);

    Container c;
    c.meta = header.at("meta");
    for (const auto& e : header.at("tensors")) {
        const std::string name = e.at("name").get<std::string>();
        const std::vector<int> shape = e.at("shape").get<std::vector<int>>();
        Tensor t(shape);
        for (long i = 0; i < t.size(); ++i) t[i] = static_cast<real>(read_f32(is));
        if (!is) throw std::runtime_error("read_container: truncated data in " + path);
        c.tensors.emplace(name, std::move(t));
    }
    return c;
}

}  // namespace poseadapt
