#include "nilc/encoder.hpp"

#include "nilc/numerics.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace nilc {

namespace {

constexpr char kMagic[8] = {'N', 'I', 'L', 'C', 'E', 'M', 'B', '1'};

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint64_t splitmix64(std::uint64_t& s) {
    s += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

double unit_draw(std::uint64_t& state) {
    double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
}

}  // namespace

EmbeddingMatrix load_embedding_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open embedding file: " + path);
    char magic[8];
    f.read(magic, 8);
    if (!f || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error(path + ": not an NILCEMB1 file");
    std::uint32_t n = read_u32(f);
    std::uint32_t d = read_u32(f);
    if (!f) throw std::runtime_error(path + ": truncated header");
    if (d == 0) throw std::runtime_error(path + ": zero embedding dimension");
    std::vector<float> raw(static_cast<size_t>(n) * d);
    f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
    if (static_cast<size_t>(f.gcount()) != raw.size() * 4)
        throw std::runtime_error(path + ": truncated payload");
    std::vector<double> data(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        if (!std::isfinite(raw[i]))
            throw std::runtime_error(path + ": non-finite value at row " + std::to_string(i / d));
        data[i] = static_cast<double>(raw[i]);
    }
    return EmbeddingMatrix(static_cast<int>(n), static_cast<int>(d), std::move(data));
}

void write_embedding_file(const std::string& path, const EmbeddingMatrix& m) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open embedding file for writing: " + path);
    f.write(kMagic, 8);
    write_u32(f, static_cast<std::uint32_t>(m.rows()));
    write_u32(f, static_cast<std::uint32_t>(m.cols()));
    std::vector<float> raw(m.data().size());
    for (size_t i = 0; i < raw.size(); ++i) raw[i] = static_cast<float>(m.data()[i]);
    f.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * 4));
    if (!f) throw std::runtime_error("failed writing embedding file: " + path);
}

Vec MockEncoder::encode_text(const std::string& text, int dim, std::uint64_t seed) {
    std::uint64_t state = fnv1a64(text) ^ (seed * 0x9E3779B97F4A7C15ull);
    Vec v(dim);
    for (int i = 0; i < dim; ++i) {
        // Box-Muller on two uniform draws keeps this portable across stdlibs.
        double u1 = unit_draw(state);
        double u2 = unit_draw(state);
        v[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    double norm = l2_norm(v);
    if (norm == 0.0) {
        v.assign(dim, 0.0);
        v[0] = 1.0;
        return v;
    }
    for (double& x : v) x /= norm;
    return v;
}

std::vector<Vec> MockEncoder::encode_batch(const std::vector<std::string>& texts) {
    std::vector<Vec> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(encode_text(t, dim_, seed_));
    return out;
}

std::vector<Vec> HttpEncoder::encode_batch(const std::vector<std::string>& texts) {
    httplib::Client client(cfg_.base_url);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);
    httplib::Headers headers;
    if (!cfg_.api_key_env.empty()) {
        if (const char* key = std::getenv(cfg_.api_key_env.c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    nlohmann::json payload;
    payload["model"] = cfg_.model;
    payload["input"] = texts;
    const std::string body = payload.dump();

    std::string last_error;
    for (int attempt = 1; attempt <= cfg_.max_retries + 1; ++attempt) {
        auto res = client.Post(cfg_.service_path, headers, body, "application/json");
        if (res && res->status == 200) {
            nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
            if (j.is_discarded() || !j.contains("data") || !j["data"].is_array() ||
                j["data"].size() != texts.size()) {
                last_error = "malformed embedding payload";
            } else {
                std::vector<Vec> out;
                out.reserve(texts.size());
                for (const auto& item : j["data"]) {
                    Vec v = item.at("embedding").get<Vec>();
                    if (dim_ == 0) dim_ = static_cast<int>(v.size());
                    if (static_cast<int>(v.size()) != dim_)
                        throw std::runtime_error("embedding service returned dimension " +
                                                 std::to_string(v.size()) + ", expected " +
                                                 std::to_string(dim_));
                    out.push_back(std::move(v));
                }
                return out;
            }
        } else if (res) {
            if (res->status != 429 && res->status < 500)
                throw std::runtime_error("embedding service rejected request: HTTP " +
                                         std::to_string(res->status));
            last_error = "HTTP " + std::to_string(res->status);
        } else {
            last_error = "connection failure (" + httplib::to_string(res.error()) + ")";
        }
        if (attempt <= cfg_.max_retries) {
            double wait = cfg_.backoff_ms * std::pow(2.0, attempt - 1);
            std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(wait));
        }
    }
    throw std::runtime_error("embedding service failed after " +
                             std::to_string(cfg_.max_retries + 1) + " attempts: " + last_error);
}

EncoderStack::EncoderStack(std::shared_ptr<TextEncoderBackend> backend, int batch_size)
    : backend_(std::move(backend)), batch_size_(batch_size) {
    if (!backend_) throw std::invalid_argument("null encoder backend");
    if (batch_size_ < 1) throw std::invalid_argument("batch size must be positive");
}

std::vector<Vec> EncoderStack::encode(const std::vector<std::string>& texts) {
    std::vector<std::string> missing;
    {
        std::lock_guard<std::mutex> lock(cache_->mu);
        std::unordered_map<std::string, bool> queued;
        for (const auto& t : texts) {
            if (cache_->entries.count(t) || queued.count(t)) continue;
            queued.emplace(t, true);
            missing.push_back(t);
        }
    }
    for (size_t off = 0; off < missing.size(); off += batch_size_) {
        size_t end = std::min(missing.size(), off + batch_size_);
        std::vector<std::string> batch(missing.begin() + off, missing.begin() + end);
        auto vecs = backend_->encode_batch(batch);
        if (vecs.size() != batch.size())
            throw std::runtime_error("encoder returned wrong batch size");
        std::lock_guard<std::mutex> lock(cache_->mu);
        for (size_t i = 0; i < batch.size(); ++i)
            cache_->entries.emplace(batch[i], std::move(vecs[i]));
    }
    std::lock_guard<std::mutex> lock(cache_->mu);
    std::vector<Vec> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(cache_->entries.at(t));
    return out;
}

Vec EncoderStack::encode_one(const std::string& text) {
    return encode(std::vector<std::string>{text}).front();
}

std::size_t EncoderStack::cache_size() const {
    std::lock_guard<std::mutex> lock(cache_->mu);
    return cache_->entries.size();
}

EncoderStack make_encoder_stack(const EncoderConfig& cfg) {
    std::shared_ptr<TextEncoderBackend> backend;
    // kind=File covers only the corpus; texts the LLM invents at runtime go
    // through the service when one is configured, otherwise through the mock.
    if (cfg.kind == EncoderConfig::Kind::Service ||
        (cfg.kind == EncoderConfig::Kind::File && !cfg.base_url.empty())) {
        backend = std::make_shared<HttpEncoder>(cfg);
    } else {
        backend = std::make_shared<MockEncoder>(cfg.mock_dim, cfg.mock_seed);
    }
    return EncoderStack(backend, cfg.batch_size);
}

}  // namespace nilc
