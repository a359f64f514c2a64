#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "bcosad/bcos_network.hpp"
#include "bcosad/errors.hpp"

namespace bcosad {

namespace {

constexpr std::array<char, 8> kMagic = {'B', 'C', 'O', 'S', 'N', 'E', 'T', '\0'};

template <typename T>
void write_le(std::ostream& out, T value) {
    std::uint64_t bits = 0;
    if constexpr (sizeof(T) == 8) {
        bits = std::bit_cast<std::uint64_t>(value);
    } else {
        bits = static_cast<std::uint64_t>(value);
    }
    std::array<char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    out.write(bytes.data(), bytes.size());
}

template <typename T>
T read_le(std::istream& in, const char* what) {
    std::array<unsigned char, sizeof(T)> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
        throw ParseError(std::string("model: truncated while reading ") + what);
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    if constexpr (std::is_same_v<T, double>) {
        return std::bit_cast<double>(bits);
    } else {
        return static_cast<T>(bits);
    }
}

}  // namespace

void save_model(const BcosNetwork& net, std::ostream& out) {
    out.write(kMagic.data(), kMagic.size());
    write_le<std::uint32_t>(out, kModelFormatVersion);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(net.layer_count()));
    for (std::size_t d : net.dims()) write_le<std::uint64_t>(out, d);
    for (const auto& layer : net.layers()) write_le<double>(out, layer.b_exponent);
    for (const auto& layer : net.layers())
        for (double w : layer.weights.data()) write_le<double>(out, w);
    if (!out) throw std::runtime_error("model: write failed");
}

void save_model(const BcosNetwork& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("model: cannot open " + path + " for writing");
    save_model(net, out);
}

BcosNetwork load_model(std::istream& in) {
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (in.gcount() != 8 || magic != kMagic) throw ParseError("model: bad magic");
    const auto version = read_le<std::uint32_t>(in, "format_version");
    if (version != kModelFormatVersion)
        throw ParseError("model: unsupported format_version " + std::to_string(version));
    const auto layer_count = read_le<std::uint32_t>(in, "layer_count");
    if (layer_count < 2 || layer_count > 4096) throw ParseError("model: implausible layer count");
    std::vector<std::uint64_t> dims(layer_count + 1);
    for (auto& d : dims) {
        d = read_le<std::uint64_t>(in, "layer_dims");
        if (d == 0 || d > (1u << 24)) throw ParseError("model: implausible layer width");
    }
    std::vector<double> bs(layer_count);
    for (auto& b : bs) b = read_le<double>(in, "b_exponent");
    std::vector<BcosLayer> layers;
    for (std::uint32_t l = 0; l < layer_count; ++l) {
        std::vector<double> w(dims[l + 1] * dims[l]);
        for (auto& v : w) v = read_le<double>(in, "weights");
        layers.push_back({Matrix(dims[l + 1], dims[l], std::move(w)), bs[l]});
    }
    if (in.peek() != std::char_traits<char>::eof()) throw ParseError("model: trailing bytes");
    try {
        return BcosNetwork(std::move(layers));
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("model: ") + e.what());
    }
}

BcosNetwork load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("model: cannot open " + path);
    return load_model(in);
}

}  // namespace bcosad
