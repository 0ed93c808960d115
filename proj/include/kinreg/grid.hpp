#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace kinreg {

/// Tensor grid on [0, Lx) (periodic) x [-V, V] x [t_start, t_end], cell centered in x and v.
/// Slice n of a GridField holds the solution at the time-cell center t_start + (n + 1/2) dt.
struct GridSpec {
    int nx = 0;
    int nv = 0;
    int nt = 0;
    double lx = 1.0;
    double v_max = 1.0;
    double t_start = 0.0;
    double t_end = 1.0;

    [[nodiscard]] double dx() const { return lx / nx; }
    [[nodiscard]] double dv() const { return 2.0 * v_max / nv; }
    [[nodiscard]] double dt() const { return (t_end - t_start) / nt; }
    [[nodiscard]] double x(int i) const { return (i + 0.5) * dx(); }
    [[nodiscard]] double v(int j) const { return -v_max + (j + 0.5) * dv(); }
    [[nodiscard]] double t(int n) const { return t_start + (n + 0.5) * dt(); }
    [[nodiscard]] double cell_volume() const { return dx() * dv() * dt(); }
    [[nodiscard]] std::size_t slice_size() const { return static_cast<std::size_t>(nx) * nv; }
    [[nodiscard]] std::size_t size() const { return slice_size() * nt; }
    [[nodiscard]] std::size_t index(int n, int i, int j) const {
        return (static_cast<std::size_t>(n) * nx + i) * nv + j;
    }
    /// Throws std::invalid_argument on nonpositive counts or extents.
    void validate() const;
    [[nodiscard]] std::string summary() const;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Whether a field is an exact solution or only a sub-solution (one-sided weak inequality).
enum class FieldRole { Solution, SubSolution };

struct GridField {
    GridSpec grid;
    std::vector<double> values;
    FieldRole role = FieldRole::Solution;

    GridField() = default;
    explicit GridField(const GridSpec& g, double fill = 0.0, FieldRole role_ = FieldRole::Solution);

    double& at(int n, int i, int j) { return values[grid.index(n, i, j)]; }
    [[nodiscard]] double at(int n, int i, int j) const { return values[grid.index(n, i, j)]; }
    std::span<double> slice(int n) { return {values.data() + grid.slice_size() * n, grid.slice_size()}; }
    [[nodiscard]] std::span<const double> slice(int n) const {
        return {values.data() + grid.slice_size() * n, grid.slice_size()};
    }
    [[nodiscard]] bool all_finite() const;
};

/// "KFP1" snapshot: magic, u32 (Nt, Nx, Nv), f64 (t_start, t_end, 0, Lx, -V, V), then values
/// with v fastest, then x, then t. Everything little-endian.
void write_snapshot(const GridField& f, const std::filesystem::path& path);
GridField read_snapshot(const std::filesystem::path& path);
std::vector<unsigned char> encode_snapshot(const GridField& f);
GridField decode_snapshot(std::span<const unsigned char> bytes);

}  // namespace kinreg
