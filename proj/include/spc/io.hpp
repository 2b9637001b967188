#pragma once

// CSV writers and JSON metadata sidecars. Numbers are printed with
// std::to_chars (shortest round-trip form), so output bytes depend only on
// the values.

#include <array>
#include <charconv>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "spc/tensor.hpp"

namespace spc {

inline constexpr std::string_view version_string = "0.1.0";

inline std::string format_number(double v)
{
    if (v == 0.0) return "0"; // folds -0
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), res.ptr};
}

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary)
    {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
    }

    void row(std::span<const std::string> cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    void row(std::initializer_list<std::string> cells)
    {
        row(std::span<const std::string>(cells.begin(), cells.size()));
    }

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

/// Grid CSV: header "row,0,1,...", then one line per row.
template <class Derived>
void write_matrix_csv(const std::filesystem::path& path, const Eigen::DenseBase<Derived>& m)
{
    CsvWriter w(path);
    std::vector<std::string> cells;
    cells.emplace_back("row");
    for (Eigen::Index j = 0; j < m.cols(); ++j) cells.push_back(std::to_string(j));
    w.row(cells);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        cells.clear();
        cells.push_back(std::to_string(i));
        for (Eigen::Index j = 0; j < m.cols(); ++j) cells.push_back(format_number(static_cast<double>(m(i, j))));
        w.row(cells);
    }
}

/// Complex matrix as two grids, <stem>_re.csv and <stem>_im.csv. Returns both paths.
inline std::array<std::filesystem::path, 2> write_complex_matrix_csv(const std::filesystem::path& dir,
                                                                     const std::string& stem,
                                                                     const Eigen::MatrixXcd& m)
{
    const auto re = dir / (stem + "_re.csv");
    const auto im = dir / (stem + "_im.csv");
    write_matrix_csv(re, m.real());
    write_matrix_csv(im, m.imag());
    return {re, im};
}

/// Long-format tensor: n,k,l,m,re,im for every entry.
inline void write_tensor_csv(const std::filesystem::path& path, const ComplexTensor4& t)
{
    CsvWriter w(path);
    w.row({"n", "k", "l", "m", "re", "im"});
    const std::size_t s = t.side();
    for (std::size_t a = 0; a < s; ++a)
        for (std::size_t b = 0; b < s; ++b)
            for (std::size_t c = 0; c < s; ++c)
                for (std::size_t d = 0; d < s; ++d) {
                    const auto v = t(a, b, c, d);
                    w.row({std::to_string(a), std::to_string(b), std::to_string(c), std::to_string(d),
                           format_number(v.real()), format_number(v.imag())});
                }
}

/// Writes <file>.meta.json next to an output file.
inline std::filesystem::path write_sidecar(const std::filesystem::path& file, const nlohmann::json& meta)
{
    auto path = file;
    path += ".meta.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << meta.dump(2) << '\n';
    return path;
}

inline nlohmann::json version_info()
{
    return {{"spc", std::string(version_string)},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

} // namespace spc
