#include "fedonet/persistence.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

namespace fedonet {

namespace {

constexpr std::uint32_t kDatasetVersion = 1;
constexpr std::uint32_t kCheckpointVersion = 1;
constexpr char kDatasetMagic[4] = {'F', 'E', 'D', 'O'};
constexpr char kCheckpointMagic[4] = {'F', 'E', 'D', 'C'};

std::array<std::uint32_t, 256> make_crc_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t c = i;
        for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
        table[i] = c;
    }
    return table;
}

const std::array<std::uint32_t, 256>& crc_table() {
    static const auto table = make_crc_table();
    return table;
}

}  // namespace

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
    const auto& table = crc_table();
    std::uint32_t c = 0xFFFFFFFFu;
    for (std::uint8_t b : bytes) c = table[(c ^ b) & 0xFFu] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

namespace {

// Little-endian buffer writer; everything is staged in memory so the CRC
// can land in the header and the file write stays atomic.
struct Buffer {
    std::vector<std::uint8_t> bytes;

    void u8(std::uint8_t v) { bytes.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        if (s.size() > 255) throw PersistError(PersistError::Kind::Shape, "string too long");
        u8(static_cast<std::uint8_t>(s.size()));
        bytes.insert(bytes.end(), s.begin(), s.end());
    }
};

struct Reader {
    const std::uint8_t* p;
    const std::uint8_t* end;

    void need(std::size_t n) const {
        if (static_cast<std::size_t>(end - p) < n)
            throw PersistError(PersistError::Kind::Io, "truncated file");
    }
    std::uint8_t u8() {
        need(1);
        return *p++;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(*p++) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(*p++) << (8 * i);
        return v;
    }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const std::size_t n = u8();
        need(n);
        std::string s(reinterpret_cast<const char*>(p), n);
        p += n;
        return s;
    }
};

void write_file_atomic(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw PersistError(PersistError::Kind::Io, "cannot open " + tmp);
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw PersistError(PersistError::Kind::Io, "write failed for " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw PersistError(PersistError::Kind::Io, "rename failed for " + path);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw PersistError(PersistError::Kind::Io, "cannot open " + path);
    const auto size = in.tellg();
    in.seekg(0);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
    in.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!in) throw PersistError(PersistError::Kind::Io, "read failed for " + path);
    return bytes;
}

void put_axis(Buffer& b, const Axis& a) {
    b.str(a.name);
    b.i64(a.res);
    b.f64(a.lo);
    b.f64(a.hi);
    b.u8(a.periodic ? 1 : 0);
}

Axis get_axis(Reader& r) {
    Axis a;
    a.name = r.str();
    a.res = r.i64();
    a.lo = r.f64();
    a.hi = r.f64();
    a.periodic = r.u8() != 0;
    return a;
}

void put_matrix(Buffer& b, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) b.f64(m(i, j));
}

void get_matrix(Reader& r, Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.f64();
}

void put_vector(Buffer& b, const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) b.f64(v(i));
}

void get_vector(Reader& r, Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = r.f64();
}

}  // namespace

void write_dataset(const Dataset& ds, const std::string& path) {
    Buffer payload;
    put_matrix(payload, ds.branch);
    put_matrix(payload, ds.coords);
    for (double v : ds.targets) payload.f64(v);
    for (std::uint64_t s : ds.sample_seeds) payload.u64(s);

    Buffer head;
    head.bytes.insert(head.bytes.end(), kDatasetMagic, kDatasetMagic + 4);
    head.u32(kDatasetVersion);
    head.u8(static_cast<std::uint8_t>(ds.spec.id));
    head.u8(static_cast<std::uint8_t>(ds.spec.coord_dim()));
    head.u8(static_cast<std::uint8_t>(ds.spec.out_channels));
    head.i64(ds.count());
    head.i64(ds.spec.sensor_count());
    head.i64(ds.coords.rows());
    head.u64(ds.base_seed);
    head.i64(ds.train_count);
    head.u64(ds.redraw_count);

    head.u8(static_cast<std::uint8_t>(ds.spec.input_axes.size()));
    for (const auto& a : ds.spec.input_axes) put_axis(head, a);
    head.u8(static_cast<std::uint8_t>(ds.spec.query_axes.size()));
    for (const auto& a : ds.spec.query_axes) put_axis(head, a);
    for (int col : ds.spec.coord_col_of_axis) head.u8(static_cast<std::uint8_t>(col));
    head.u8(static_cast<std::uint8_t>(ds.spec.params.size()));
    for (const auto& [k, v] : ds.spec.params) {
        head.str(k);
        head.f64(v);
    }
    head.i64(static_cast<std::int64_t>(ds.spec.sensor_indices.size()));
    for (auto s : ds.spec.sensor_indices) head.i64(s);

    head.u32(crc32(payload.bytes));
    head.bytes.insert(head.bytes.end(), payload.bytes.begin(), payload.bytes.end());
    write_file_atomic(path, head.bytes);
}

Dataset read_dataset(const std::string& path) {
    const auto bytes = read_file(path);
    Reader r{bytes.data(), bytes.data() + bytes.size()};
    r.need(4);
    if (std::memcmp(r.p, kDatasetMagic, 4) != 0)
        throw PersistError(PersistError::Kind::Magic, path + " is not a dataset file");
    r.p += 4;
    if (r.u32() != kDatasetVersion)
        throw PersistError(PersistError::Kind::Version, "unsupported dataset version in " + path);

    Dataset ds;
    ds.spec.id = static_cast<BenchmarkId>(r.u8());
    const int coord_dim = r.u8();
    ds.spec.out_channels = r.u8();
    const std::int64_t count = r.i64();
    const std::int64_t sensors = r.i64();
    const std::int64_t queries = r.i64();
    ds.base_seed = r.u64();
    ds.train_count = r.i64();
    ds.redraw_count = r.u64();
    if (count < 0 || sensors < 0 || queries < 0 || ds.train_count < 0 || ds.train_count > count)
        throw PersistError(PersistError::Kind::Shape, "inconsistent dataset header in " + path);

    const int n_in = r.u8();
    for (int i = 0; i < n_in; ++i) ds.spec.input_axes.push_back(get_axis(r));
    const int n_q = r.u8();
    for (int i = 0; i < n_q; ++i) ds.spec.query_axes.push_back(get_axis(r));
    if (n_q != coord_dim) throw PersistError(PersistError::Kind::Shape, "axis/coordinate mismatch");
    for (int i = 0; i < n_q; ++i) ds.spec.coord_col_of_axis.push_back(r.u8());
    const int n_params = r.u8();
    for (int i = 0; i < n_params; ++i) {
        const std::string key = r.str();
        ds.spec.params[key] = r.f64();
    }
    const std::int64_t n_sensors = r.i64();
    if (n_sensors != sensors) throw PersistError(PersistError::Kind::Shape, "sensor count mismatch");
    for (std::int64_t i = 0; i < n_sensors; ++i) ds.spec.sensor_indices.push_back(r.i64());

    const std::uint32_t stored_crc = r.u32();
    const std::span<const std::uint8_t> payload{r.p, static_cast<std::size_t>(r.end - r.p)};
    const std::size_t expect = static_cast<std::size_t>(count) * sensors * 8 +
                               static_cast<std::size_t>(queries) * coord_dim * 8 +
                               static_cast<std::size_t>(count) * queries * ds.spec.out_channels * 8 +
                               static_cast<std::size_t>(count) * 8;
    if (payload.size() != expect)
        throw PersistError(PersistError::Kind::Shape, "payload size mismatch in " + path);
    if (crc32(payload) != stored_crc)
        throw PersistError(PersistError::Kind::Checksum, "payload checksum failure in " + path);

    ds.branch.resize(count, sensors);
    get_matrix(r, ds.branch);
    ds.coords.resize(queries, coord_dim);
    get_matrix(r, ds.coords);
    ds.targets.resize(static_cast<std::size_t>(count) * queries * ds.spec.out_channels);
    for (auto& v : ds.targets) v = r.f64();
    ds.sample_seeds.resize(static_cast<std::size_t>(count));
    for (auto& s : ds.sample_seeds) s = r.u64();
    return ds;
}

namespace {

void put_mlp(Buffer& b, const MlpParams& p) {
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        put_matrix(b, p.weights[l]);
        put_vector(b, p.biases[l]);
    }
}

void get_mlp(Reader& r, MlpParams& p) {
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        get_matrix(r, p.weights[l]);
        get_vector(r, p.biases[l]);
    }
}

MlpParams mlp_shell(const std::vector<int>& layers, Activation act) {
    MlpParams p;
    p.layer_sizes = layers;
    p.activation = act;
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
        p.weights.emplace_back(layers[l + 1], layers[l]);
        p.biases.emplace_back(layers[l + 1]);
    }
    return p;
}

void put_adam(Buffer& b, const AdamState& s) {
    b.i64(s.step_count);
    b.f64(s.beta1);
    b.f64(s.beta2);
    b.f64(s.epsilon);
    for (std::size_t l = 0; l < s.m_w.size(); ++l) {
        put_matrix(b, s.m_w[l]);
        put_matrix(b, s.v_w[l]);
        put_vector(b, s.m_b[l]);
        put_vector(b, s.v_b[l]);
    }
}

void get_adam(Reader& r, AdamState& s) {
    s.step_count = r.i64();
    s.beta1 = r.f64();
    s.beta2 = r.f64();
    s.epsilon = r.f64();
    for (std::size_t l = 0; l < s.m_w.size(); ++l) {
        get_matrix(r, s.m_w[l]);
        get_matrix(r, s.v_w[l]);
        get_vector(r, s.m_b[l]);
        get_vector(r, s.v_b[l]);
    }
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    Buffer payload;
    put_mlp(payload, ckpt.branch);
    put_mlp(payload, ckpt.trunk);
    if (ckpt.freq) put_matrix(payload, ckpt.freq->B);
    put_adam(payload, ckpt.branch_adam);
    put_adam(payload, ckpt.trunk_adam);

    Buffer head;
    head.bytes.insert(head.bytes.end(), kCheckpointMagic, kCheckpointMagic + 4);
    head.u32(kCheckpointVersion);
    head.u8(static_cast<std::uint8_t>(ckpt.benchmark));
    head.u8(ckpt.config.variant == Variant::Fedonet ? 1 : 0);
    head.u8(ckpt.config.activation == Activation::Relu ? 1 : 0);
    head.u8(ckpt.freq.has_value() ? 1 : 0);
    head.u64(ckpt.model_seed);
    head.u64(ckpt.train_seed);
    head.i64(ckpt.train_step);
    head.i64(ckpt.config.latent_p);
    head.i64(ckpt.config.out_channels);
    head.i64(ckpt.config.sensor_count);
    head.i64(ckpt.config.coord_dim);
    if (ckpt.config.embed) {
        head.u8(1);
        head.i64(ckpt.config.embed->mapping_size);
        head.f64(ckpt.config.embed->sigma);
        head.u64(ckpt.config.embed->seed);
    } else {
        head.u8(0);
    }
    head.u32(static_cast<std::uint32_t>(ckpt.config.branch_layers.size()));
    for (int s : ckpt.config.branch_layers) head.i64(s);
    head.u32(static_cast<std::uint32_t>(ckpt.config.trunk_layers.size()));
    for (int s : ckpt.config.trunk_layers) head.i64(s);

    head.u32(crc32(payload.bytes));
    head.bytes.insert(head.bytes.end(), payload.bytes.begin(), payload.bytes.end());
    write_file_atomic(path, head.bytes);
}

Checkpoint load_checkpoint(const std::string& path) {
    const auto bytes = read_file(path);
    Reader r{bytes.data(), bytes.data() + bytes.size()};
    r.need(4);
    if (std::memcmp(r.p, kCheckpointMagic, 4) != 0)
        throw PersistError(PersistError::Kind::Magic, path + " is not a checkpoint file");
    r.p += 4;
    if (r.u32() != kCheckpointVersion)
        throw PersistError(PersistError::Kind::Version, "unsupported checkpoint version in " + path);

    Checkpoint ckpt;
    ckpt.benchmark = static_cast<BenchmarkId>(r.u8());
    ckpt.config.variant = r.u8() ? Variant::Fedonet : Variant::Vanilla;
    ckpt.config.activation = r.u8() ? Activation::Relu : Activation::Tanh;
    const bool has_freq = r.u8() != 0;
    ckpt.model_seed = r.u64();
    ckpt.train_seed = r.u64();
    ckpt.train_step = r.i64();
    ckpt.config.latent_p = static_cast<int>(r.i64());
    ckpt.config.out_channels = static_cast<int>(r.i64());
    ckpt.config.sensor_count = static_cast<int>(r.i64());
    ckpt.config.coord_dim = static_cast<int>(r.i64());
    if (r.u8()) {
        EmbedConfig e;
        e.mapping_size = static_cast<int>(r.i64());
        e.sigma = r.f64();
        e.seed = r.u64();
        ckpt.config.embed = e;
    }
    const std::uint32_t nb = r.u32();
    for (std::uint32_t i = 0; i < nb; ++i) ckpt.config.branch_layers.push_back(static_cast<int>(r.i64()));
    const std::uint32_t nt = r.u32();
    for (std::uint32_t i = 0; i < nt; ++i) ckpt.config.trunk_layers.push_back(static_cast<int>(r.i64()));

    if (ckpt.config.variant == Variant::Fedonet && (!has_freq || !ckpt.config.embed))
        throw PersistError(PersistError::Kind::Shape, "fedonet checkpoint missing its embedding");
    if (ckpt.config.variant == Variant::Vanilla && has_freq)
        throw PersistError(PersistError::Kind::Shape, "vanilla checkpoint carries an embedding");
    try {
        validate_config(ckpt.config);
    } catch (const std::invalid_argument& e) {
        throw PersistError(PersistError::Kind::Shape, e.what());
    }

    const std::uint32_t stored_crc = r.u32();
    const std::span<const std::uint8_t> payload{r.p, static_cast<std::size_t>(r.end - r.p)};
    if (crc32(payload) != stored_crc)
        throw PersistError(PersistError::Kind::Checksum, "payload checksum failure in " + path);

    ckpt.branch = mlp_shell(ckpt.config.branch_layers, ckpt.config.activation);
    ckpt.trunk = mlp_shell(ckpt.config.trunk_layers, ckpt.config.activation);
    get_mlp(r, ckpt.branch);
    get_mlp(r, ckpt.trunk);
    if (has_freq) {
        FreqMatrix f;
        f.sigma = ckpt.config.embed->sigma;
        f.seed = ckpt.config.embed->seed;
        f.B.resize(ckpt.config.embed->mapping_size, ckpt.config.coord_dim);
        get_matrix(r, f.B);
        ckpt.freq = std::move(f);
    }
    ckpt.branch_adam = adam_init(ckpt.branch);
    ckpt.trunk_adam = adam_init(ckpt.trunk);
    get_adam(r, ckpt.branch_adam);
    get_adam(r, ckpt.trunk_adam);
    if (r.p != r.end) throw PersistError(PersistError::Kind::Shape, "trailing bytes in " + path);
    return ckpt;
}

}  // namespace fedonet
