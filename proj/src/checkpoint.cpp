#include "checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace innie {

namespace {

constexpr char kMagic[8] = {'I', 'N', 'N', 'I', 'E', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out.insert(out.end(), b, b + n);
    }
    template <class U>
    void le(U v) {
        for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u32(std::uint32_t v) { le(v); }
    void u64(std::uint64_t v) { le(v); }
    void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }

    std::vector<std::uint8_t> out;
};

class Reader {
public:
    Reader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}
    template <class U>
    U le() {
        need(sizeof(U));
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(data_[pos_ + i]) << (8 * i));
        pos_ += sizeof(U);
        return v;
    }
    std::uint32_t u32() { return le<std::uint32_t>(); }
    std::uint64_t u64() { return le<std::uint64_t>(); }
    float f32() { return std::bit_cast<float>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    void expect(const void* p, std::size_t n) {
        need(n);
        if (std::memcmp(data_ + pos_, p, n) != 0) throw CheckpointError("not a checkpoint file (bad magic)");
        pos_ += n;
    }
    std::size_t remaining() const { return size_ - pos_; }

private:
    void need(std::size_t n) const {
        if (size_ - pos_ < n) throw CheckpointError("checkpoint is truncated");
    }
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

std::uint32_t crc(const std::uint8_t* data, std::size_t n) {
    uLong c = crc32(0L, Z_NULL, 0);
    while (n > 0) {
        const uInt chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
        c = crc32(c, data, chunk);
        data += chunk;
        n -= chunk;
    }
    return static_cast<std::uint32_t>(c);
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck) {
    const Architecture& arch = ck.network.architecture();
    Writer w;
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(arch.in_channels));
    for (int v : arch.block_widths) w.u32(static_cast<std::uint32_t>(v));
    for (int v : arch.dense_widths) w.u32(static_cast<std::uint32_t>(v));
    w.u32(static_cast<std::uint32_t>(ck.scales.size()));
    for (int s : ck.scales) w.u32(static_cast<std::uint32_t>(s));
    w.f64(ck.dist_cap);
    w.u64(ck.seed);
    w.u64(arch.fingerprint());
    const auto params = ck.network.parameters();
    w.u64(params.size());
    for (float p : params) w.f32(p);
    w.u32(crc(w.out.data(), w.out.size()));
    return std::move(w.out);
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < sizeof kMagic + 8) throw CheckpointError("checkpoint is truncated");
    Reader head(bytes.data(), bytes.size());
    head.expect(kMagic, sizeof kMagic);

    const std::size_t body = bytes.size() - 4;
    Reader tail(bytes.data() + body, 4);
    if (crc(bytes.data(), body) != tail.u32()) throw CheckpointError("checkpoint checksum mismatch (corrupt or truncated file)");

    Reader r(bytes.data() + sizeof kMagic, body - sizeof kMagic);
    if (const auto version = r.u32(); version != kVersion)
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    Architecture arch;
    arch.in_channels = static_cast<int>(r.u32());
    for (int& v : arch.block_widths) v = static_cast<int>(r.u32());
    for (int& v : arch.dense_widths) v = static_cast<int>(r.u32());
    const std::uint32_t n_scales = r.u32();
    if (n_scales > 1024) throw CheckpointError("checkpoint header is corrupt");
    std::vector<int> scales(n_scales);
    for (int& s : scales) s = static_cast<int>(r.u32());
    const double cap = r.f64();
    const std::uint64_t seed = r.u64();
    const std::uint64_t fingerprint = r.u64();
    try {
        arch.validate();
    } catch (const std::exception&) {
        throw CheckpointError("checkpoint header is corrupt");
    }
    if (fingerprint != arch.fingerprint()) throw CheckpointError("checkpoint architecture hash does not match its header");
    if (static_cast<int>(scales.size()) != arch.in_channels)
        throw CheckpointError("checkpoint scale list does not match its input channels");

    Network<float> net(arch);
    const std::uint64_t count = r.u64();
    if (count != net.parameters().size())
        throw CheckpointError("checkpoint parameter count does not match its architecture");
    if (r.remaining() != count * 4) throw CheckpointError("checkpoint is truncated");
    for (float& p : net.parameters()) p = r.f32();
    return Checkpoint{std::move(net), std::move(scales), cap, seed};
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& file) {
    const auto bytes = encode_checkpoint(checkpoint);
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint " + file.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError("cannot write checkpoint " + file.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw CheckpointError("cannot read checkpoint " + file.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

void require_scales(const Checkpoint& checkpoint, const std::vector<int>& scales) {
    if (checkpoint.scales == scales) return;
    auto list = [](const std::vector<int>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
        return s;
    };
    throw ArchitectureMismatch("architecture mismatch: checkpoint was trained with scales [" + list(checkpoint.scales) +
                               "] but the project uses [" + list(scales) + "]");
}

}  // namespace innie
