#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "nilc/config.hpp"
#include "nilc/types.hpp"

namespace nilc {

/// Reads an NILCEMB1 file: magic "NILCEMB1", u32 N, u32 d (little-endian),
/// then N*d float32 row-major. Throws on bad magic, truncation, or a
/// non-finite value (named by row).
EmbeddingMatrix load_embedding_file(const std::string& path);
void write_embedding_file(const std::string& path, const EmbeddingMatrix& m);

class TextEncoderBackend {
public:
    virtual ~TextEncoderBackend() = default;
    virtual std::vector<Vec> encode_batch(const std::vector<std::string>& texts) = 0;
    virtual int dim() const = 0;  // 0 until known (service discovers lazily)
    virtual std::string describe() const = 0;
};

/// Deterministic test encoder: a seeded hash of the text expanded into a
/// unit d-vector. Lets the full pipeline run with zero services.
class MockEncoder final : public TextEncoderBackend {
public:
    MockEncoder(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}
    std::vector<Vec> encode_batch(const std::vector<std::string>& texts) override;
    int dim() const override { return dim_; }
    std::string describe() const override { return "mock"; }

    static Vec encode_text(const std::string& text, int dim, std::uint64_t seed);

private:
    int dim_;
    std::uint64_t seed_;
};

/// Embedding-service client: POST {model, input:[texts]} ->
/// {data:[{embedding:[...]}]}. Retries transient failures with backoff.
class HttpEncoder final : public TextEncoderBackend {
public:
    explicit HttpEncoder(EncoderConfig cfg) : cfg_(std::move(cfg)) {}
    std::vector<Vec> encode_batch(const std::vector<std::string>& texts) override;
    int dim() const override { return dim_; }
    std::string describe() const override { return "service:" + cfg_.base_url; }

private:
    EncoderConfig cfg_;
    int dim_ = 0;
};

/// Caching, batching front for a backend. encode() is a pure function of
/// (text, backend identity) within a run; cache hits return the identical
/// vector. Internally synchronized.
class EncoderStack {
public:
    EncoderStack(std::shared_ptr<TextEncoderBackend> backend, int batch_size = 64);

    std::vector<Vec> encode(const std::vector<std::string>& texts);
    Vec encode_one(const std::string& text);

    int dim() const { return backend_->dim(); }
    std::size_t cache_size() const;
    const TextEncoderBackend& backend() const { return *backend_; }

private:
    struct Cache {
        std::mutex mu;
        std::unordered_map<std::string, Vec> entries;
    };
    std::shared_ptr<TextEncoderBackend> backend_;
    int batch_size_;
    std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

/// Builds the dynamic-text encoder from config (Service or Mock; kind=File
/// covers only the corpus matrix and pairs with a mock for novel texts).
EncoderStack make_encoder_stack(const EncoderConfig& cfg);

}  // namespace nilc
