#pragma once

// Internal helpers for the flat binary model formats.

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pecopt/dataset.hpp"

namespace pecopt::detail {

template <typename T>
void push_pod(std::vector<unsigned char>& out, const T& v) {
    const auto* p = reinterpret_cast<const unsigned char*>(&v);
    out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T read_pod(const unsigned char*& p, const unsigned char* end) {
    if (p + sizeof(T) > end) {
        throw std::runtime_error("model deserialization: truncated data");
    }
    T v;
    std::memcpy(&v, p, sizeof(T));
    p += sizeof(T);
    return v;
}

inline void push_scaler(std::vector<unsigned char>& out, const ScalerParams& s) {
    for (double v : s.mean) push_pod(out, v);
    for (double v : s.stddev) push_pod(out, v);
}

inline ScalerParams read_scaler(const unsigned char*& p, const unsigned char* end) {
    ScalerParams s;
    for (auto& v : s.mean) v = read_pod<double>(p, end);
    for (auto& v : s.stddev) v = read_pod<double>(p, end);
    return s;
}

inline void write_file(const std::string& path, const std::vector<unsigned char>& buf) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) {
        throw std::runtime_error("write failed for " + path);
    }
}

inline std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    return std::vector<unsigned char>((std::istreambuf_iterator<char>(in)),
                                      std::istreambuf_iterator<char>());
}

}  // namespace pecopt::detail
