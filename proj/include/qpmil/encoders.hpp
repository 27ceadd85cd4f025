#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

#include "qpmil/core_data.hpp"

namespace qpmil {

struct EncoderDims {
    int embed_dim = 32;   // token/prompt embedding width
    int hidden_dim = 48;  // stage-1 output width
    int feature_dim = 64; // shared output width of both encoders
};

// Frozen two-stage affine map with tanh between stages. Stands in for the
// pretrained text encoder; the prompt path and the class-text path share one
// instance of this map.
class PromptEncoder {
public:
    struct Cache {
        Eigen::VectorXd input_mean;  // embed_dim
        Eigen::VectorXd hidden;      // hidden_dim, post-tanh
    };

    PromptEncoder(const EncoderDims& dims, uint64_t seed);

    const EncoderDims& dims() const { return dims_; }

    // rows: L x embed_dim. Mean over rows, then the frozen map.
    Eigen::VectorXd encode_rows(const Eigen::MatrixXd& rows, Cache* cache = nullptr) const;
    Eigen::VectorXd encode_mean(const Eigen::VectorXd& mean, Cache* cache = nullptr) const;

    // dL/d(input mean) given dL/d(output) at the cached activation point.
    Eigen::VectorXd backprop_to_mean(const Cache& cache, const Eigen::VectorXd& out_grad) const;

private:
    EncoderDims dims_;
    Eigen::MatrixXd stage1_;  // embed_dim x hidden_dim
    Eigen::VectorXd bias1_;   // hidden_dim
    Eigen::MatrixXd stage2_;  // hidden_dim x feature_dim
    Eigen::VectorXd bias2_;   // feature_dim
};

// Deterministic token -> unit-vector map: seeded hash expands to a
// pseudo-random direction in R^{embed_dim}.
class TokenEmbedder {
public:
    TokenEmbedder(int embed_dim, uint64_t seed);

    Eigen::VectorXd embed(std::string_view token) const;
    // Whitespace-tokenized mean of token embeddings; errors on empty text.
    Eigen::VectorXd text_mean(std::string_view text) const;

    int embed_dim() const { return embed_dim_; }

private:
    int embed_dim_;
    uint64_t seed_;
};

Eigen::VectorXd encode_prompt(const PromptEncoder& encoder, const Eigen::MatrixXd& prompt);
Eigen::VectorXd encode_text(const PromptEncoder& encoder, const TokenEmbedder& embedder,
                            std::string_view description);

// ---------------------------------------------------------------------------
// Precomputed-feature ingestion.
//
// Feature files: 16-byte header (magic "QPML", u16 version, u16 reserved,
// u32 n, u32 feature_dim), then n x feature_dim little-endian float32,
// row-major.
// Manifest: CSV with header bag_id,dataset,label,path. Relative paths are
// resolved against the manifest's directory.
// ---------------------------------------------------------------------------

inline constexpr uint16_t kFeatureFileVersion = 1;

void write_feature_file(const std::string& path, const Eigen::MatrixXd& features);
Eigen::MatrixXd read_feature_file(const std::string& path);

struct ManifestRow {
    std::string bag_id;
    int dataset_index = 0;
    int label = -1;
    std::string path;
};
using FeatureManifest = std::vector<ManifestRow>;

FeatureManifest read_manifest(const std::string& csv_path);
void write_manifest(const std::string& csv_path, const FeatureManifest& rows);

// Loads every referenced feature file. expected_dim == 0 infers the dimension
// from the first bag; all bags must agree.
std::vector<InstanceBag> ingest_features(const std::string& manifest_path, int expected_dim = 0);

}  // namespace qpmil
