#pragma once

// Binary interchange for embedding bundles.
//
// MatrixFile: "REHK1" | u32 version | u64 rows | u64 cols | rows*cols f32, row-major
// LabelFile:  "REHKL" | u64 count | count u32
// All integers and floats are little-endian. A bundle manifest is a JSON file
// naming the component files (paths relative to the manifest) plus N, K, d.

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "core.hpp"

namespace rehark::io {

inline constexpr std::array<char, 5> kMatrixMagic{'R', 'E', 'H', 'K', '1'};
inline constexpr std::array<char, 5> kLabelMagic{'R', 'E', 'H', 'K', 'L'};
inline constexpr std::uint32_t kMatrixVersion = 1;
inline constexpr std::size_t kMatrixHeaderBytes = 5 + 4 + 8 + 8;
inline constexpr std::size_t kLabelHeaderBytes = 5 + 8;

namespace detail {

template <typename UInt>
void put_le(std::string& out, UInt v) {
    for (std::size_t i = 0; i < sizeof(UInt); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <typename UInt>
UInt get_le(const unsigned char* p) {
    UInt v = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(p[i]) << (8 * i);
    return v;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(ErrorCode::IoFailure, "read failed for " + path.string());
    return bytes;
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot create " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

}  // namespace detail

/// Serialize a matrix to the MatrixFile byte layout. Entries are narrowed to f32.
inline std::string encode_matrix(const Matrix& m) {
    std::string out;
    out.reserve(kMatrixHeaderBytes + static_cast<std::size_t>(m.size()) * 4);
    out.append(kMatrixMagic.data(), kMatrixMagic.size());
    detail::put_le<std::uint32_t>(out, kMatrixVersion);
    detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const double v = m(r, c);
            const auto f = static_cast<float>(v);
            if (!std::isfinite(v) || !std::isfinite(f)) {
                throw Error(ErrorCode::NonFiniteEntry,
                            "entry (" + std::to_string(r) + "," + std::to_string(c) + ") is not a finite f32");
            }
            detail::put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
        }
    }
    return out;
}

inline Matrix decode_matrix(const std::string& bytes, const std::string& origin = "<memory>") {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < kMatrixMagic.size() ||
        std::memcmp(bytes.data(), kMatrixMagic.data(), kMatrixMagic.size()) != 0) {
        throw Error(ErrorCode::BadMagic, origin);
    }
    if (bytes.size() < kMatrixHeaderBytes) throw Error(ErrorCode::TruncatedFile, origin + ": short header");
    const auto version = detail::get_le<std::uint32_t>(p + 5);
    if (version != kMatrixVersion) {
        throw Error(ErrorCode::UnsupportedVersion, origin + ": version " + std::to_string(version));
    }
    const auto rows = detail::get_le<std::uint64_t>(p + 9);
    const auto cols = detail::get_le<std::uint64_t>(p + 17);
    const std::uint64_t payload = bytes.size() - kMatrixHeaderBytes;
    // rows * cols * 4 must not overflow before being compared to the payload size.
    if (rows != 0 && cols != 0 && (cols > payload / 4 || rows > payload / 4 / cols)) {
        throw Error(ErrorCode::TruncatedFile, origin + ": header declares more data than present");
    }
    if (rows * cols * 4 != payload) {
        throw Error(ErrorCode::TruncatedFile, origin + ": expected " + std::to_string(rows * cols * 4) +
                                                  " data bytes, found " + std::to_string(payload));
    }
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    const unsigned char* data = p + kMatrixHeaderBytes;
    for (std::uint64_t i = 0; i < rows * cols; ++i) {
        m.data()[i] = static_cast<double>(std::bit_cast<float>(detail::get_le<std::uint32_t>(data + 4 * i)));
    }
    return m;
}

inline Matrix load_matrix(const std::filesystem::path& path) {
    return decode_matrix(detail::read_file(path), path.string());
}

inline void save_matrix(const Matrix& m, const std::filesystem::path& path) {
    detail::write_file(path, encode_matrix(m));
}

inline std::string encode_labels(const LabelVector& labels) {
    std::string out;
    out.reserve(kLabelHeaderBytes + labels.size() * 4);
    out.append(kLabelMagic.data(), kLabelMagic.size());
    detail::put_le<std::uint64_t>(out, labels.size());
    for (auto l : labels) detail::put_le<std::uint32_t>(out, l);
    return out;
}

inline LabelVector decode_labels(const std::string& bytes, const std::string& origin = "<memory>") {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < kLabelMagic.size() ||
        std::memcmp(bytes.data(), kLabelMagic.data(), kLabelMagic.size()) != 0) {
        throw Error(ErrorCode::BadMagic, origin);
    }
    if (bytes.size() < kLabelHeaderBytes) throw Error(ErrorCode::TruncatedFile, origin + ": short header");
    const auto count = detail::get_le<std::uint64_t>(p + 5);
    const std::uint64_t payload = bytes.size() - kLabelHeaderBytes;
    if (count > payload / 4 || count * 4 != payload) throw Error(ErrorCode::TruncatedFile, origin);
    LabelVector labels(count);
    for (std::uint64_t i = 0; i < count; ++i) labels[i] = detail::get_le<std::uint32_t>(p + kLabelHeaderBytes + 4 * i);
    return labels;
}

inline LabelVector load_labels(const std::filesystem::path& path) {
    return decode_labels(detail::read_file(path), path.string());
}

inline void save_labels(const LabelVector& labels, const std::filesystem::path& path) {
    detail::write_file(path, encode_labels(labels));
}

struct Bundle {
    std::string name;
    Matrix support_features;
    LabelVector support_labels;
    Matrix val_features;
    LabelVector val_labels;
    Matrix test_features;
    LabelVector test_labels;
    Matrix w_clip;
    Matrix w_gpt3;
    std::vector<std::string> class_names;
    std::size_t n_classes = 0;
    std::size_t n_shots = 0;
    std::size_t dim = 0;
};

/// Checks every Bundle invariant, throwing the first violation found.
inline void validate_bundle(const Bundle& b) {
    using rehark::detail::require;
    const auto d = static_cast<Eigen::Index>(b.dim);
    const auto n = b.n_classes;
    require(n >= 1, ErrorCode::InvalidArgument, "n_classes must be >= 1");
    require(b.n_shots >= 1, ErrorCode::InvalidArgument, "n_shots must be >= 1");

    auto check_width = [&](const Matrix& m, const char* what) {
        require(m.cols() == d, ErrorCode::DimensionMismatch,
                std::string(what) + " has " + std::to_string(m.cols()) + " columns, manifest dim is " +
                    std::to_string(b.dim));
    };
    check_width(b.support_features, "support_features");
    check_width(b.val_features, "val_features");
    check_width(b.test_features, "test_features");
    check_width(b.w_clip, "w_clip");
    check_width(b.w_gpt3, "w_gpt3");
    require(static_cast<std::size_t>(b.w_clip.rows()) == n, ErrorCode::DimensionMismatch,
            "w_clip has " + std::to_string(b.w_clip.rows()) + " rows, expected " + std::to_string(n));
    require(static_cast<std::size_t>(b.w_gpt3.rows()) == n, ErrorCode::DimensionMismatch,
            "w_gpt3 has " + std::to_string(b.w_gpt3.rows()) + " rows, expected " + std::to_string(n));
    require(b.class_names.size() == n, ErrorCode::DimensionMismatch,
            "class_names has " + std::to_string(b.class_names.size()) + " entries, expected " + std::to_string(n));

    auto check_labels = [&](const Matrix& m, const LabelVector& labels, const char* what) {
        require(static_cast<std::size_t>(m.rows()) == labels.size(), ErrorCode::DimensionMismatch,
                std::string(what) + ": " + std::to_string(labels.size()) + " labels for " +
                    std::to_string(m.rows()) + " rows");
        for (auto l : labels) {
            require(l < n, ErrorCode::LabelOutOfRange,
                    std::string(what) + ": label " + std::to_string(l) + " >= n_classes " + std::to_string(n));
        }
    };
    check_labels(b.support_features, b.support_labels, "support");
    check_labels(b.val_features, b.val_labels, "val");
    check_labels(b.test_features, b.test_labels, "test");

    std::vector<std::size_t> per_class(n, 0);
    for (auto l : b.support_labels) ++per_class[l];
    for (std::size_t c = 0; c < n; ++c) {
        require(per_class[c] == b.n_shots, ErrorCode::UnbalancedSupport,
                "class " + std::to_string(c) + " has " + std::to_string(per_class[c]) + " support samples, expected " +
                    std::to_string(b.n_shots));
    }
}

inline Bundle load_bundle(const std::filesystem::path& manifest_path) {
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(detail::read_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::IoFailure, manifest_path.string() + ": " + e.what());
    }
    const auto base = manifest_path.parent_path();

    auto field = [&](const char* key) -> const nlohmann::json& {
        if (!manifest.contains(key)) throw Error(ErrorCode::MissingComponent, std::string("manifest key ") + key);
        return manifest.at(key);
    };
    auto component = [&](const char* key) {
        const auto& v = field(key);
        if (!v.is_string()) throw Error(ErrorCode::MissingComponent, std::string(key) + " must be a path");
        auto path = base / v.get<std::string>();
        if (!std::filesystem::exists(path)) {
            throw Error(ErrorCode::MissingComponent, std::string(key) + ": " + path.string() + " does not exist");
        }
        return path;
    };
    auto count = [&](const char* key) -> std::size_t {
        const auto& v = field(key);
        if (!v.is_number_unsigned()) throw Error(ErrorCode::InvalidArgument, std::string(key) + " must be unsigned");
        return v.get<std::size_t>();
    };

    Bundle b;
    b.name = manifest.value("name", manifest_path.stem().string());
    b.n_classes = count("n_classes");
    b.n_shots = count("n_shots");
    b.dim = count("dim");
    b.support_features = load_matrix(component("support_features"));
    b.support_labels = load_labels(component("support_labels"));
    b.val_features = load_matrix(component("val_features"));
    b.val_labels = load_labels(component("val_labels"));
    b.test_features = load_matrix(component("test_features"));
    b.test_labels = load_labels(component("test_labels"));
    b.w_clip = load_matrix(component("w_clip"));
    b.w_gpt3 = load_matrix(component("w_gpt3"));

    const auto& names = field("class_names");
    if (names.is_array()) {
        for (const auto& n : names) b.class_names.push_back(n.get<std::string>());
    } else {
        // A string value names a UTF-8 text file with one class per line.
        std::ifstream in(component("class_names"));
        for (std::string line; std::getline(in, line);) {
            if (!line.empty()) b.class_names.push_back(line);
        }
    }
    validate_bundle(b);
    return b;
}

/// Writes every component next to the manifest and returns the manifest path.
inline std::filesystem::path save_bundle(const Bundle& b, const std::filesystem::path& dir) {
    validate_bundle(b);
    std::filesystem::create_directories(dir);
    save_matrix(b.support_features, dir / "support_features.rehk");
    save_labels(b.support_labels, dir / "support_labels.rehl");
    save_matrix(b.val_features, dir / "val_features.rehk");
    save_labels(b.val_labels, dir / "val_labels.rehl");
    save_matrix(b.test_features, dir / "test_features.rehk");
    save_labels(b.test_labels, dir / "test_labels.rehl");
    save_matrix(b.w_clip, dir / "w_clip.rehk");
    save_matrix(b.w_gpt3, dir / "w_gpt3.rehk");

    nlohmann::json manifest = {
        {"name", b.name},
        {"support_features", "support_features.rehk"},
        {"support_labels", "support_labels.rehl"},
        {"val_features", "val_features.rehk"},
        {"val_labels", "val_labels.rehl"},
        {"test_features", "test_features.rehk"},
        {"test_labels", "test_labels.rehl"},
        {"w_clip", "w_clip.rehk"},
        {"w_gpt3", "w_gpt3.rehk"},
        {"class_names", b.class_names},
        {"n_classes", b.n_classes},
        {"n_shots", b.n_shots},
        {"dim", b.dim},
    };
    const auto path = dir / "manifest.json";
    detail::write_file(path, manifest.dump(2) + "\n");
    return path;
}

}  // namespace rehark::io
