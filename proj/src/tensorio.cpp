#include "kcd/tensorio.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "kcd/error.hpp"

namespace kcd::io {

namespace {

constexpr std::array<std::uint8_t, 4> kTensorMagic{'K', 'T', 'E', 'N'};
constexpr std::array<std::uint8_t, 4> kContainerMagic{'K', 'C', 'D', 'M'};
constexpr std::uint8_t kAuto = 0xFF;
constexpr int kPinCount = 8;

class Writer {
public:
    void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) { le(v, 2); }
    void u32(std::uint32_t v) { le(v, 4); }
    void u64(std::uint64_t v) { le(v, 8); }
    void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }

    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    void le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    std::span<const std::uint8_t> bytes(std::size_t n) {
        need(n);
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    double f64() { return std::bit_cast<double>(le(8)); }

    std::size_t position() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (remaining() < n) throw Error(Errc::CorruptFile, "truncated input");
    }
    std::uint64_t le(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

void read_header(Reader& in, const std::array<std::uint8_t, 4>& magic) {
    if (in.remaining() < magic.size()) throw Error(Errc::CorruptFile, "file shorter than its magic");
    const auto m = in.bytes(magic.size());
    if (!std::equal(m.begin(), m.end(), magic.begin())) {
        throw Error(Errc::UnsupportedFormat, "bad magic");
    }
    const std::uint16_t version = in.u16();
    if (version != kFormatVersion) {
        throw Error(Errc::UnsupportedVersion, "format version " + std::to_string(version));
    }
}

void write_shape_and_payload(Writer& out, const Tensor& t) {
    if (t.shape.size() > std::numeric_limits<std::uint8_t>::max()) {
        throw Error(Errc::InvalidShape, "rank above 255");
    }
    if (element_count(t.shape) != t.values.size()) {
        throw Error(Errc::InvalidShape, "tensor values do not match its shape");
    }
    out.u8(static_cast<std::uint8_t>(t.shape.size()));
    for (auto dim : t.shape) out.u64(dim);
    for (double v : t.values) out.f64(v);
}

Tensor read_shape_and_payload(Reader& in) {
    Tensor t;
    const std::uint8_t rank = in.u8();
    t.shape.reserve(rank);
    std::uint64_t count = 1;
    for (std::uint8_t i = 0; i < rank; ++i) {
        const std::uint64_t dim = in.u64();
        if (dim != 0 && count > std::numeric_limits<std::uint64_t>::max() / dim) {
            throw Error(Errc::CorruptFile, "dims overflow");
        }
        count *= dim;
        t.shape.push_back(dim);
    }
    if (count > in.remaining() / 8) throw Error(Errc::CorruptFile, "payload shorter than dims imply");
    if (count * 8 != in.remaining()) throw Error(Errc::CorruptFile, "trailing bytes after payload");
    t.values.resize(static_cast<std::size_t>(count));
    for (auto& v : t.values) v = in.f64();
    return t;
}

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::uint8_t> encode_options(const CipherOptions& options) {
    Writer out;
    out.u8(options.map ? static_cast<std::uint8_t>(*options.map) : kAuto);
    out.u8(options.family ? static_cast<std::uint8_t>(*options.family) : kAuto);

    const PinnedParams& p = options.pins;
    const std::optional<double> pins[kPinCount] = {
        p.r, p.mu, p.s, p.kick, p.p,
        p.k ? std::optional<double>(static_cast<double>(*p.k)) : std::nullopt,
        p.beta, p.eps_c};
    std::uint16_t flags = 0;
    for (int bit = 0; bit < kPinCount; ++bit) {
        if (pins[bit]) flags |= static_cast<std::uint16_t>(1u << bit);
    }
    out.u16(flags);
    for (const auto& pin : pins) {
        if (pin) out.f64(*pin);
    }
    out.u32(options.t_burn);
    out.f64(options.noise_sigma);
    out.f64(options.alpha);
    return out.take();
}

CipherOptions decode_options(std::span<const std::uint8_t> bytes, std::size_t& consumed) {
    Reader in(bytes);
    CipherOptions o;
    const std::uint8_t map = in.u8();
    if (map != kAuto) {
        if (map >= kMapCount) throw Error(Errc::CorruptFile, "unknown map id");
        o.map = static_cast<MapKind>(map);
    }
    const std::uint8_t family = in.u8();
    if (family != kAuto) {
        if (family > 1) throw Error(Errc::CorruptFile, "unknown graph family id");
        o.family = static_cast<GraphFamily>(family);
    }
    const std::uint16_t flags = in.u16();
    if (flags >> kPinCount) throw Error(Errc::CorruptFile, "unknown pin flags");

    std::optional<double> pins[kPinCount];
    for (int bit = 0; bit < kPinCount; ++bit) {
        if (flags & (1u << bit)) pins[bit] = in.f64();
    }
    o.pins.r = pins[0];
    o.pins.mu = pins[1];
    o.pins.s = pins[2];
    o.pins.kick = pins[3];
    o.pins.p = pins[4];
    if (pins[5]) {
        const double k = *pins[5];
        if (!(k >= 0.0 && k <= 4294967295.0) || std::floor(k) != k) {
            throw Error(Errc::CorruptFile, "pinned k is not a 32-bit integer");
        }
        o.pins.k = static_cast<std::uint32_t>(k);
    }
    o.pins.beta = pins[6];
    o.pins.eps_c = pins[7];
    o.t_burn = in.u32();
    o.noise_sigma = in.f64();
    o.alpha = in.f64();

    try {
        o.validate();
    } catch (const Error& e) {
        throw Error(Errc::CorruptFile, std::string("options block: ") + e.what());
    }
    consumed = in.position();
    return o;
}

std::vector<std::uint8_t> encode_tensor(const Tensor& tensor) {
    Writer out;
    out.bytes(kTensorMagic);
    out.u16(kFormatVersion);
    write_shape_and_payload(out, tensor);
    return out.take();
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
    Reader in(bytes);
    read_header(in, kTensorMagic);
    return read_shape_and_payload(in);
}

std::vector<std::uint8_t> encode_container(const MaskedContainer& container) {
    Writer out;
    out.bytes(kContainerMagic);
    out.u16(kFormatVersion);
    out.bytes(container.nonce.bytes());
    out.bytes(container.fingerprint);
    out.bytes(encode_options(container.options));
    write_shape_and_payload(out, container.tensor);
    return out.take();
}

MaskedContainer decode_container(std::span<const std::uint8_t> bytes) {
    Reader in(bytes);
    read_header(in, kContainerMagic);
    MaskedContainer c;
    c.nonce = Nonce::from_bytes(in.bytes(Nonce::size));
    const auto fp = in.bytes(c.fingerprint.size());
    std::copy(fp.begin(), fp.end(), c.fingerprint.begin());
    std::size_t used = 0;
    c.options = decode_options(bytes.subspan(in.position()), used);
    in.bytes(used);
    c.tensor = read_shape_and_payload(in);
    return c;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::IoError, "cannot open " + path.string());
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (f.bad()) throw Error(Errc::IoError, "read failed: " + path.string());
    return data;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(Errc::IoError, "cannot create " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error(Errc::IoError, "write failed: " + path.string());
}

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
    write_file(path, encode_tensor(tensor));
}

Tensor read_tensor(const std::filesystem::path& path) { return decode_tensor(read_file(path)); }

void write_container(const std::filesystem::path& path, const MaskedContainer& container) {
    write_file(path, encode_container(container));
}

MaskedContainer read_container(const std::filesystem::path& path) {
    return decode_container(read_file(path));
}

Tensor parse_csv(std::string_view text) {
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t cols = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (line.empty()) continue;

        std::size_t fields = 0;
        std::string_view rest = line;
        for (;;) {
            const auto comma = rest.find(',');
            const std::string_view cell = trim(rest.substr(0, comma));
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
                throw Error(Errc::InvalidInput, "bad CSV number '" + std::string(cell) + "'");
            }
            values.push_back(v);
            ++fields;
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
        if (rows == 0) {
            cols = fields;
        } else if (fields != cols) {
            throw Error(Errc::InvalidInput, "ragged CSV row " + std::to_string(rows + 1));
        }
        ++rows;
    }
    if (rows == 0) throw Error(Errc::InvalidInput, "empty CSV");
    if (rows == 1) return Tensor{{cols}, std::move(values)};
    return Tensor{{rows, cols}, std::move(values)};
}

std::string format_csv(const Tensor& tensor) {
    const std::size_t width =
        tensor.shape.empty() ? 1 : static_cast<std::size_t>(std::max<std::uint64_t>(tensor.shape.back(), 1));
    std::string out;
    char buf[32];
    for (std::size_t i = 0; i < tensor.values.size(); ++i) {
        const auto res = std::to_chars(buf, buf + sizeof buf, tensor.values[i]);
        out.append(buf, res.ptr);
        out.push_back((i + 1) % width == 0 ? '\n' : ',');
    }
    return out;
}

Tensor read_csv(const std::filesystem::path& path) {
    const auto raw = read_file(path);
    return parse_csv(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()));
}

void write_csv(const std::filesystem::path& path, const Tensor& tensor) {
    const std::string text = format_csv(tensor);
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace kcd::io
