#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppcmt {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    double& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    Vec3& operator-=(const Vec3& o) {
        x -= o.x;
        y -= o.y;
        z -= o.z;
        return *this;
    }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm2() const { return x * x + y * y + z * z; }
    double norm() const { return std::sqrt(norm2()); }

    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

inline double dist2(const Vec3& a, const Vec3& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}

inline double dist(const Vec3& a, const Vec3& b) { return std::sqrt(dist2(a, b)); }

// Strict lexicographic (x, y, z) order.
inline bool lex_less(const Vec3& a, const Vec3& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.z < b.z;
}

using PointCloud = std::vector<Vec3>;
using IndexSet = std::vector<std::size_t>;

// Row-major rows x cols index matrix (k-NN results and friends).
struct IndexMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> data;

    IndexMatrix() = default;
    IndexMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0) {}

    std::size_t& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    std::size_t at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Local groups: per-center neighbor indices plus center-relative offsets.
// local_offsets[g*k + j] == cloud[neighbor_indices.at(g, j)] - centers[g], exactly.
struct GroupedPatches {
    std::vector<Vec3> centers;
    IndexMatrix neighbor_indices;
    std::vector<Vec3> local_offsets;

    std::size_t group_count() const { return centers.size(); }
    std::size_t group_size() const { return neighbor_indices.cols; }
    const Vec3& offset(std::size_t g, std::size_t j) const {
        return local_offsets[g * neighbor_indices.cols + j];
    }
};

// Raised on malformed input files; maps to CLI exit code 2.
class ParseError : public std::runtime_error {
  public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

inline bool finite(const Vec3& p) {
    return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

inline void require_nonempty(const PointCloud& cloud) {
    if (cloud.empty()) throw std::invalid_argument("empty input");
}

}  // namespace ppcmt
