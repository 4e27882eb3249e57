#include "jtw/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include "jtw/errors.hpp"

namespace jtw {

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ConfigError("not a number: '" + std::string(s) + "'");
    }
    return v;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + path.string());
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(line);
        start = end + 1;
    }
    return lines;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t end = s.find(sep, start);
        out.emplace_back(s.substr(start, end == std::string_view::npos ? end : end - start));
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return out;
}

// ------------------------------------------------------------ word2vec text

std::string to_word2vec_text(const EmbeddingTable& table) {
    std::string out = std::to_string(table.words.size()) + " " + std::to_string(table.dim) + "\n";
    for (std::size_t i = 0; i < table.words.size(); ++i) {
        if (table.vectors[i].size() != table.dim) {
            throw ConfigError("embedding for '" + table.words[i] + "' has wrong dimension");
        }
        out += table.words[i];
        for (double v : table.vectors[i]) {
            out += ' ';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

EmbeddingTable parse_word2vec_text(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.empty()) throw ConfigError("word2vec file is empty");
    std::istringstream header(lines[0]);
    std::size_t count = 0;
    EmbeddingTable table;
    if (!(header >> count >> table.dim)) throw ConfigError("word2vec header must be '<count> <dim>'");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split(lines[i], ' ');
        while (!fields.empty() && fields.back().empty()) fields.pop_back();
        if (fields.size() != table.dim + 1) {
            throw ConfigError("word2vec line " + std::to_string(i + 1) + ": expected " +
                              std::to_string(table.dim) + " values");
        }
        std::vector<double> v;
        v.reserve(table.dim);
        for (std::size_t k = 1; k < fields.size(); ++k) v.push_back(parse_double(fields[k]));
        table.words.push_back(std::move(fields[0]));
        table.vectors.push_back(std::move(v));
    }
    if (table.words.size() != count) {
        throw ConfigError("word2vec header announces " + std::to_string(count) + " rows, found " +
                          std::to_string(table.words.size()));
    }
    return table;
}

DenseVectors load_dense_vectors(const std::filesystem::path& path) {
    auto table = parse_word2vec_text(read_file(path));
    DenseVectors vectors(table.dim);
    for (std::size_t i = 0; i < table.words.size(); ++i) {
        vectors.insert(std::move(table.words[i]), std::move(table.vectors[i]));
    }
    return vectors;
}

// ------------------------------------------------------------ checkpoints

namespace {

constexpr char kMagic[8] = {'J', 'T', 'W', 'C', 'K', 'P', 'T', '\0'};

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

class Writer {
public:
    template <class T>
    void put(T v) {
        char buf[sizeof(T)];
        std::memcpy(buf, &v, sizeof(T));
        out_.append(buf, sizeof(T));
    }
    void put_bytes(std::string_view s) { out_.append(s); }
    std::string& str() { return out_; }

private:
    std::string out_;
};

class Reader {
public:
    explicit Reader(std::string_view in) : in_(in) {}
    template <class T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, in_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string_view get_bytes(std::size_t n) {
        need(n);
        auto s = in_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t pos() const { return pos_; }

private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) throw ConfigError("checkpoint is truncated");
    }
    std::string_view in_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
    check_params(ckpt.model, ckpt.params);
    Writer w;
    w.put_bytes(std::string_view(kMagic, sizeof kMagic));
    w.put<std::uint32_t>(kCheckpointVersion);
    const auto& m = ckpt.model;
    for (std::uint64_t v : {m.vocab_size, m.latent_dim, m.topics, m.hidden, m.samples}) w.put(v);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(m.mode));
    w.put<std::uint64_t>(m.dense_dim);
    w.put<std::uint64_t>(ckpt.seed);
    w.put<std::uint64_t>(ckpt.vocab_hash);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(ckpt.params.size()));
    for (const auto& e : ckpt.params) {
        w.put<std::uint32_t>(static_cast<std::uint32_t>(e.name.size()));
        w.put_bytes(e.name);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(e.value.rank()));
        for (std::size_t d : e.value.shape()) w.put<std::uint64_t>(d);
        for (double v : e.value.values()) w.put(v);
    }
    const std::uint64_t sum = fnv1a(w.str());
    w.put(sum);
    return std::move(w.str());
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
    if (bytes.size() < sizeof kMagic + 12 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
        throw ConfigError("not a checkpoint file");
    }
    const std::string_view body = bytes.substr(0, bytes.size() - 8);
    std::uint64_t stored = 0;
    std::memcpy(&stored, bytes.data() + body.size(), 8);
    if (fnv1a(body) != stored) throw ConfigError("checkpoint checksum mismatch");

    Reader r(body);
    r.get_bytes(sizeof kMagic);
    const auto version = r.get<std::uint32_t>();
    if (version != kCheckpointVersion) {
        throw ConfigError("unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint ckpt;
    auto& m = ckpt.model;
    m.vocab_size = r.get<std::uint64_t>();
    m.latent_dim = r.get<std::uint64_t>();
    m.topics = r.get<std::uint64_t>();
    m.hidden = r.get<std::uint64_t>();
    m.samples = r.get<std::uint64_t>();
    const auto mode = r.get<std::uint8_t>();
    if (mode > 1) throw ConfigError("checkpoint has unknown input mode");
    m.mode = static_cast<InputMode>(mode);
    m.dense_dim = r.get<std::uint64_t>();
    ckpt.seed = r.get<std::uint64_t>();
    ckpt.vocab_hash = r.get<std::uint64_t>();
    const auto n = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < n; ++i) {
        const auto len = r.get<std::uint32_t>();
        std::string name(r.get_bytes(len));
        const auto rank = r.get<std::uint32_t>();
        if (rank > 2) throw ConfigError("checkpoint tensor '" + name + "' has rank > 2");
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) d = r.get<std::uint64_t>();
        Tensor t(shape);
        for (double& v : t.values()) v = r.get<double>();
        ckpt.params.add(std::move(name), std::move(t));
    }
    if (r.pos() != body.size()) throw ConfigError("checkpoint has trailing bytes");
    check_params(ckpt.model, ckpt.params);
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    return deserialize_checkpoint(read_file(path));
}

// ------------------------------------------------------------ exports

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string topic_table_tsv(const std::vector<std::vector<TopWord>>& topics, const Vocabulary& vocab) {
    std::string out;
    for (std::size_t t = 0; t < topics.size(); ++t) {
        for (std::size_t r = 0; r < topics[t].size(); ++r) {
            out += std::to_string(t) + "\t" + std::to_string(r + 1) + "\t" +
                   vocab.token(topics[t][r].id) + "\t" + format_double(topics[t][r].prob) + "\n";
        }
    }
    return out;
}

std::string distribution_csv(std::span<const std::string> labels,
                             std::span<const std::vector<double>> distributions) {
    if (labels.size() != distributions.size()) throw ConfigError("label/distribution count mismatch");
    const std::size_t T = distributions.empty() ? 0 : distributions[0].size();
    std::string out = "label";
    for (std::size_t t = 0; t < T; ++t) out += ",topic_" + std::to_string(t);
    out += '\n';
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (distributions[i].size() != T) throw ConfigError("distributions differ in length");
        out += csv_escape(labels[i]);
        for (double v : distributions[i]) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

}  // namespace jtw
