#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "himae/tensor.hpp"

namespace himae {

// Little-endian binary container: magic "HMAE", u32 version, config JSON,
// training counters, RNG state, then a tensor directory
// (name, dtype, shape, payload). Also covers the flat window-shard format.

namespace io {

inline void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline void write_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(os, bits);
}

inline void write_string(std::ostream& os, const std::string& s) {
    write_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

inline std::uint64_t read_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline double read_f64(std::istream& is) {
    const std::uint64_t bits = read_u64(is);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

inline std::string read_string(std::istream& is) {
    const std::uint64_t n = read_u64(is);
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    return s;
}

inline void write_f64_array(std::ostream& os, const double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) write_f64(os, p[i]);
}

inline void read_f64_array(std::istream& is, double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) p[i] = read_f64(is);
}

}  // namespace io

enum class DType : std::uint8_t { f64 = 0, f32 = 1 };

struct CheckpointData {
    std::string config_json;
    std::uint64_t step = 0;
    std::uint64_t epoch = 0;
    std::string rng_state;
    double best_val = 0;
    std::uint32_t stagnant_epochs = 0;
    std::vector<std::pair<std::string, Tensor3>> tensors;

    const Tensor3* find(const std::string& name) const {
        for (const auto& [n, t] : tensors)
            if (n == name) return &t;
        return nullptr;
    }
};

inline constexpr char kCheckpointMagic[4] = {'H', 'M', 'A', 'E'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void save_checkpoint(const std::string& path, const CheckpointData& ckpt) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open checkpoint for write: " + path);
    os.write(kCheckpointMagic, 4);
    io::write_u32(os, kCheckpointVersion);
    io::write_string(os, ckpt.config_json);
    io::write_u64(os, ckpt.step);
    io::write_u64(os, ckpt.epoch);
    io::write_string(os, ckpt.rng_state);
    io::write_f64(os, ckpt.best_val);
    io::write_u32(os, ckpt.stagnant_epochs);
    io::write_u32(os, static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& [name, t] : ckpt.tensors) {
        io::write_string(os, name);
        os.put(static_cast<char>(DType::f64));
        io::write_u32(os, static_cast<std::uint32_t>(t.batch));
        io::write_u32(os, static_cast<std::uint32_t>(t.channels));
        io::write_u32(os, static_cast<std::uint32_t>(t.length));
        io::write_f64_array(os, t.data.data(), t.size());
    }
    if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

inline CheckpointData load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    const std::uint32_t version = io::read_u32(is);
    if (version != kCheckpointVersion)
        throw std::runtime_error("unsupported checkpoint version");
    CheckpointData ckpt;
    ckpt.config_json = io::read_string(is);
    ckpt.step = io::read_u64(is);
    ckpt.epoch = io::read_u64(is);
    ckpt.rng_state = io::read_string(is);
    ckpt.best_val = io::read_f64(is);
    ckpt.stagnant_epochs = io::read_u32(is);
    const std::uint32_t count = io::read_u32(is);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string name = io::read_string(is);
        const auto dtype = static_cast<DType>(is.get());
        if (dtype != DType::f64) throw std::runtime_error("unsupported tensor dtype");
        const int b = static_cast<int>(io::read_u32(is));
        const int c = static_cast<int>(io::read_u32(is));
        const int t = static_cast<int>(io::read_u32(is));
        Tensor3 tensor(b, c, t);
        io::read_f64_array(is, tensor.data.data(), tensor.size());
        ckpt.tensors.emplace_back(std::move(name), std::move(tensor));
    }
    if (!is) throw std::runtime_error("truncated checkpoint: " + path);
    return ckpt;
}

}  // namespace himae
