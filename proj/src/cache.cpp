#include <cstring>
#include <filesystem>
#include <fstream>

#include "goaltm/errors.hpp"
#include "goaltm/io.hpp"
#include "goaltm/providers.hpp"

namespace goaltm {

namespace {

constexpr char kMagic[4] = {'G', 'T', 'M', 'E'};
constexpr uint16_t kVersion = 1;
constexpr size_t kHeaderSize = 4 + 2 + 4 + 4;
constexpr size_t kCountOffset = 4 + 2 + 4;

void append_u16(std::string& out, uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void append_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_f32(std::string& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    append_u32(out, bits);
}

struct Reader {
    const std::string& bytes;
    size_t pos = 0;

    bool need(size_t n) const { return pos + n <= bytes.size(); }

    uint16_t u16() {
        if (!need(2)) throw CacheError("cache file truncated");
        uint16_t v = static_cast<uint8_t>(bytes[pos]) |
                     (static_cast<uint16_t>(static_cast<uint8_t>(bytes[pos + 1])) << 8);
        pos += 2;
        return v;
    }

    uint32_t u32() {
        if (!need(4)) throw CacheError("cache file truncated");
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<uint32_t>(static_cast<uint8_t>(bytes[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }

    float f32() {
        uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    std::string str(size_t n) {
        if (!need(n)) throw CacheError("cache file truncated");
        std::string s = bytes.substr(pos, n);
        pos += n;
        return s;
    }
};

Mat quantize(const Mat& m) {
    Mat out(m.rows, m.cols);
    for (size_t i = 0; i < m.data.size(); ++i)
        out.data[i] = static_cast<double>(static_cast<float>(m.data[i]));
    return out;
}

std::string encode_record(const std::string& key, const Mat& quantized) {
    std::string out;
    append_u32(out, static_cast<uint32_t>(key.size()));
    out += key;
    append_u32(out, static_cast<uint32_t>(quantized.rows));
    for (double x : quantized.data) append_f32(out, static_cast<float>(x));
    return out;
}

} // namespace

EmbeddingCache::EmbeddingCache(const std::string& path, int dim) : path_(path), dim_(dim) {
    if (dim <= 0) throw CacheError("cache dimension must be positive");
    if (!std::filesystem::exists(path)) {
        std::string header(kMagic, 4);
        append_u16(header, kVersion);
        append_u32(header, static_cast<uint32_t>(dim));
        append_u32(header, 0);
        atomic_write_bytes(path, header);
        return;
    }

    std::string bytes = read_file_bytes(path);
    if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw CacheError("cache file has bad magic: " + path);
    Reader r{bytes, 4};
    uint16_t version = r.u16();
    if (version != kVersion)
        throw CacheError("cache file version " + std::to_string(version) + " unsupported: " + path);
    uint32_t file_dim = r.u32();
    if (static_cast<int>(file_dim) != dim)
        throw CacheError("cache dimension mismatch: file has " + std::to_string(file_dim) +
                         ", expected " + std::to_string(dim));
    uint32_t count = r.u32();
    for (uint32_t i = 0; i < count; ++i) {
        uint32_t key_len = r.u32();
        std::string key = r.str(key_len);
        uint32_t row_count = r.u32();
        if (row_count == 0) throw CacheError("cache record with zero rows: " + path);
        Mat m(static_cast<int>(row_count), dim);
        for (double& x : m.data) x = static_cast<double>(r.f32());
        if (!entries_.emplace(std::move(key), std::move(m)).second)
            throw CacheError("cache file has duplicate key: " + path);
    }
    if (r.pos != bytes.size()) throw CacheError("cache file has trailing bytes: " + path);
}

std::optional<Mat> EmbeddingCache::get(const std::string& key) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void EmbeddingCache::put(const std::string& key, const Mat& value) {
    if (value.cols != dim_) throw CacheError("cache put with wrong dimension");
    if (value.rows <= 0) throw CacheError("cache put with no rows");
    Mat q = quantize(value);
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(key);
    if (it != entries_.end()) {
        if (it->second == q) return;
        throw CacheError("cache key collision with different value: " + key);
    }

    std::fstream file(path_, std::ios::in | std::ios::out | std::ios::binary);
    if (!file) throw CacheError("cannot open cache for update: " + path_);
    file.seekp(0, std::ios::end);
    std::string record = encode_record(key, q);
    file.write(record.data(), static_cast<std::streamsize>(record.size()));
    uint32_t count = static_cast<uint32_t>(entries_.size() + 1);
    std::string count_bytes;
    append_u32(count_bytes, count);
    file.seekp(kCountOffset, std::ios::beg);
    file.write(count_bytes.data(), 4);
    if (!file) throw CacheError("cache write failed: " + path_);
    file.close();
    entries_.emplace(key, std::move(q));
}

Mat EmbeddingCache::get_or_compute(const std::string& key, const std::function<Mat()>& compute) {
    if (std::optional<Mat> hit = get(key)) return *hit;
    put(key, compute());
    return *get(key);
}

CachedEmbeddingProvider::CachedEmbeddingProvider(EmbeddingProvider& inner,
                                                 std::shared_ptr<EmbeddingCache> cache)
    : inner_(inner), cache_(std::move(cache)) {
    if (!cache_) throw CacheError("cached provider needs a cache");
    if (cache_->dim() != inner_.dim())
        throw CacheError("cache dimension " + std::to_string(cache_->dim()) +
                         " does not match provider dimension " + std::to_string(inner_.dim()));
}

std::string CachedEmbeddingProvider::id() const { return inner_.id(); }

int CachedEmbeddingProvider::dim() const { return inner_.dim(); }

Mat CachedEmbeddingProvider::embed_tokens(const std::vector<std::string>& tokens) {
    auto key_for = [this](const std::string& token) {
        return inner_.id() + "\x1f" + "tok" + "\x1f" + token;
    };

    std::vector<std::string> missing;
    std::unordered_set<std::string> seen;
    for (const std::string& t : tokens) {
        if (!seen.insert(t).second) continue;
        if (!cache_->get(key_for(t))) missing.push_back(t);
    }
    if (!missing.empty()) {
        Mat computed = inner_.embed_tokens(missing);
        for (size_t i = 0; i < missing.size(); ++i) {
            Mat row(1, computed.cols);
            row.set_row(0, computed.row_vec(static_cast<int>(i)));
            cache_->put(key_for(missing[i]), row);
        }
    }

    Mat out(static_cast<int>(tokens.size()), inner_.dim());
    for (size_t i = 0; i < tokens.size(); ++i) {
        std::optional<Mat> hit = cache_->get(key_for(tokens[i]));
        if (!hit) throw CacheError("cache lookup failed after fill for token: " + tokens[i]);
        out.set_row(static_cast<int>(i), hit->row_vec(0));
    }
    return out;
}

} // namespace goaltm
