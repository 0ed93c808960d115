#include "kinreg/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

namespace kinreg {

void GridSpec::validate() const {
    if (nx <= 0 || nv <= 0 || nt <= 0) throw std::invalid_argument("grid counts must be positive");
    if (!(lx > 0.0) || !(v_max > 0.0)) throw std::invalid_argument("grid extents must be positive");
    if (!(t_end > t_start)) throw std::invalid_argument("grid requires t_end > t_start");
    if (!std::isfinite(lx) || !std::isfinite(v_max) || !std::isfinite(t_start) || !std::isfinite(t_end))
        throw std::invalid_argument("grid extents must be finite");
}

std::string GridSpec::summary() const {
    std::ostringstream os;
    os << nt << 'x' << nx << 'x' << nv;
    return os.str();
}

GridField::GridField(const GridSpec& g, double fill, FieldRole role_)
    : grid(g), values(g.size(), fill), role(role_) {}

bool GridField::all_finite() const {
    for (double x : values)
        if (!std::isfinite(x)) return false;
    return true;
}

namespace {

constexpr char kMagic[4] = {'K', 'F', 'P', '1'};
constexpr std::size_t kHeaderBytes = 4 + 3 * 4 + 6 * 8;

template <typename T>
void put_le(std::vector<unsigned char>& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char b[sizeof(T)];
    std::memcpy(b, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(b), std::end(b));
    out.insert(out.end(), std::begin(b), std::end(b));
}

template <typename T>
T get_le(std::span<const unsigned char> in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw std::runtime_error("snapshot truncated");
    unsigned char b[sizeof(T)];
    std::memcpy(b, in.data() + pos, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(b), std::end(b));
    pos += sizeof(T);
    T value;
    std::memcpy(&value, b, sizeof(T));
    return value;
}

}  // namespace

std::vector<unsigned char> encode_snapshot(const GridField& f) {
    const GridSpec& g = f.grid;
    std::vector<unsigned char> out;
    out.reserve(kHeaderBytes + 8 * f.values.size());
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.nt));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.nx));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.nv));
    for (double b : {g.t_start, g.t_end, 0.0, g.lx, -g.v_max, g.v_max}) put_le<double>(out, b);
    for (double x : f.values) put_le<double>(out, x);
    return out;
}

GridField decode_snapshot(std::span<const unsigned char> bytes) {
    if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw std::runtime_error("not a KFP1 snapshot");
    std::size_t pos = 4;
    GridSpec g;
    g.nt = static_cast<int>(get_le<std::uint32_t>(bytes, pos));
    g.nx = static_cast<int>(get_le<std::uint32_t>(bytes, pos));
    g.nv = static_cast<int>(get_le<std::uint32_t>(bytes, pos));
    double b[6];
    for (double& x : b) x = get_le<double>(bytes, pos);
    if (b[2] != 0.0 || b[4] != -b[5]) throw std::runtime_error("snapshot domain bounds not of the form [0,Lx) x [-V,V]");
    g.t_start = b[0];
    g.t_end = b[1];
    g.lx = b[3];
    g.v_max = b[5];
    g.validate();
    if (bytes.size() != kHeaderBytes + 8 * g.size()) throw std::runtime_error("snapshot size does not match header");
    GridField f(g);
    for (double& x : f.values) x = get_le<double>(bytes, pos);
    return f;
}

void write_snapshot(const GridField& f, const std::filesystem::path& path) {
    const auto bytes = encode_snapshot(f);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw std::runtime_error("failed writing " + path.string());
}

GridField read_snapshot(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return decode_snapshot(bytes);
}

}  // namespace kinreg
