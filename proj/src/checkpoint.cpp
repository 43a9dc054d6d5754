#include "slz/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace slz {

namespace {

constexpr std::array<char, 4> kMagic = {'S', 'L', 'Z', 'K'};

template <typename U>
void put(std::ostream& out, U value) {
    std::array<unsigned char, sizeof(U)> bytes;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFF);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

template <typename U>
U get(std::istream& in) {
    std::array<unsigned char, sizeof(U)> bytes;
    if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
        throw std::runtime_error("checkpoint truncated");
    }
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
    return value;
}

}  // namespace

void write_checkpoint(std::ostream& out, const UNetParams<float>& params) {
    out.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(out, kCheckpointVersion);
    const auto& c = params.config;
    put<std::uint32_t>(out, c.depth);
    put<std::uint32_t>(out, c.base_channels);
    put<std::uint32_t>(out, c.in_channels);
    put<std::uint32_t>(out, c.num_classes);
    put<std::uint64_t>(out, c.seed);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(params.tensors.size()));
    for (std::size_t i = 0; i < params.tensors.size(); ++i) {
        const auto& name = params.names[i];
        const auto& t = params.tensors[i];
        put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
        for (auto d : t.shape()) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
        for (float v : t.values()) put<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
    }
    if (!out) throw std::runtime_error("failed writing checkpoint");
}

UNetParams<float> read_checkpoint(std::istream& in) {
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
        throw std::runtime_error("not a checkpoint: missing SLZK magic");
    }
    const auto version = get<std::uint32_t>(in);
    if (version != kCheckpointVersion) {
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    }
    UNetParams<float> params;
    auto& c = params.config;
    c.depth = get<std::uint32_t>(in);
    c.base_channels = get<std::uint32_t>(in);
    c.in_channels = get<std::uint32_t>(in);
    c.num_classes = get<std::uint32_t>(in);
    c.seed = get<std::uint64_t>(in);
    c.validate();

    const auto layout = parameter_layout(c);
    const auto count = get<std::uint32_t>(in);
    if (count != layout.size()) {
        throw std::runtime_error("checkpoint has " + std::to_string(count) +
                                 " tensors, config implies " + std::to_string(layout.size()));
    }
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto name_len = get<std::uint32_t>(in);
        if (name_len > 4096) throw std::runtime_error("checkpoint tensor name too long");
        std::string name(name_len, '\0');
        if (!in.read(name.data(), name_len)) throw std::runtime_error("checkpoint truncated");
        const auto rank = get<std::uint32_t>(in);
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) d = get<std::uint32_t>(in);
        if (name != layout[i].name || shape != layout[i].shape) {
            throw std::runtime_error("checkpoint tensor " + name + " " + shape_string(shape) +
                                     " does not match expected " + layout[i].name + " " +
                                     shape_string(layout[i].shape));
        }
        Tensor<float> t(shape);
        for (auto& v : t.values()) v = std::bit_cast<float>(get<std::uint32_t>(in));
        params.names.push_back(std::move(name));
        params.tensors.push_back(std::move(t));
    }
    return params;
}

void save_checkpoint(const std::filesystem::path& path, const UNetParams<float>& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_checkpoint(out, params);
}

UNetParams<float> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
    return read_checkpoint(in);
}

}  // namespace slz
