#include "qpmil/encoders.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "qpmil/rng.hpp"

namespace qpmil {

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols, double scale) {
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            m(r, c) = scale * rng.normal();
        }
    }
    return m;
}

}  // namespace

PromptEncoder::PromptEncoder(const EncoderDims& dims, uint64_t seed) : dims_(dims) {
    require(dims.embed_dim > 0 && dims.hidden_dim > 0 && dims.feature_dim > 0,
            "encoder: dimensions must be positive");
    Rng rng(derive_seed(seed, "prompt_encoder"));
    const double s1 = 1.0 / std::sqrt(static_cast<double>(dims.embed_dim));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(dims.hidden_dim));
    stage1_ = random_matrix(rng, dims.embed_dim, dims.hidden_dim, s1);
    bias1_ = random_matrix(rng, dims.hidden_dim, 1, 0.1);
    stage2_ = random_matrix(rng, dims.hidden_dim, dims.feature_dim, s2);
    bias2_ = random_matrix(rng, dims.feature_dim, 1, 0.1);
}

Eigen::VectorXd PromptEncoder::encode_mean(const Eigen::VectorXd& mean, Cache* cache) const {
    require(mean.size() == dims_.embed_dim, "encoder: input width " +
                std::to_string(mean.size()) + " != embed dim " + std::to_string(dims_.embed_dim));
    require(mean.allFinite(), "encoder: non-finite input");
    const Eigen::VectorXd hidden = (stage1_.transpose() * mean + bias1_).array().tanh();
    if (cache != nullptr) {
        cache->input_mean = mean;
        cache->hidden = hidden;
    }
    return stage2_.transpose() * hidden + bias2_;
}

Eigen::VectorXd PromptEncoder::encode_rows(const Eigen::MatrixXd& rows, Cache* cache) const {
    require(rows.rows() >= 1, "encoder: empty input matrix");
    require(rows.cols() == dims_.embed_dim, "encoder: input width " +
                std::to_string(rows.cols()) + " != embed dim " + std::to_string(dims_.embed_dim));
    return encode_mean(rows.colwise().mean(), cache);
}

Eigen::VectorXd PromptEncoder::backprop_to_mean(const Cache& cache,
                                                const Eigen::VectorXd& out_grad) const {
    const Eigen::VectorXd hidden_grad = stage2_ * out_grad;
    const Eigen::VectorXd pre_grad =
        (1.0 - cache.hidden.array().square()).matrix().cwiseProduct(hidden_grad);
    return stage1_ * pre_grad;
}

TokenEmbedder::TokenEmbedder(int embed_dim, uint64_t seed)
    : embed_dim_(embed_dim), seed_(seed) {
    require(embed_dim > 0, "embedder: embed dim must be positive");
}

Eigen::VectorXd TokenEmbedder::embed(std::string_view token) const {
    Rng rng(derive_seed(seed_, "token", fnv1a64(token)));
    Eigen::VectorXd v(embed_dim_);
    for (int i = 0; i < embed_dim_; ++i) {
        v[i] = rng.normal();
    }
    const double norm = v.norm();
    if (norm > kNormEpsilon) {
        v /= norm;
    }
    return v;
}

Eigen::VectorXd TokenEmbedder::text_mean(std::string_view text) const {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(embed_dim_);
    int count = 0;
    size_t pos = 0;
    while (pos < text.size()) {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) {
            ++pos;
        }
        size_t end = pos;
        while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) {
            ++end;
        }
        if (end > pos) {
            sum += embed(text.substr(pos, end - pos));
            ++count;
        }
        pos = end;
    }
    require(count > 0, "encode_text: empty description");
    return sum / static_cast<double>(count);
}

Eigen::VectorXd encode_prompt(const PromptEncoder& encoder, const Eigen::MatrixXd& prompt) {
    return encoder.encode_rows(prompt);
}

Eigen::VectorXd encode_text(const PromptEncoder& encoder, const TokenEmbedder& embedder,
                            std::string_view description) {
    return encoder.encode_mean(embedder.text_mean(description));
}

// ---------------------------------------------------------------------------
// Feature files and manifests
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'Q', 'P', 'M', 'L'};

void put_u16(std::ostream& out, uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>(v >> 8)};
    out.write(reinterpret_cast<const char*>(b), 2);
}

void put_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) {
        b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(b), 4);
}

uint16_t get_u16(const unsigned char* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint32_t get_u32(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint32_t float_bits(float v) {
    static_assert(sizeof(float) == 4);
    uint32_t bits = 0;
    std::memcpy(&bits, &v, 4);
    return bits;
}

float bits_float(uint32_t bits) {
    float v = 0.0f;
    std::memcpy(&v, &bits, 4);
    return v;
}

}  // namespace

void write_feature_file(const std::string& path, const Eigen::MatrixXd& features) {
    require(features.rows() >= 1 && features.cols() >= 1,
            "write_feature_file: empty matrix for " + path);
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "write_feature_file: cannot open " + path);
    out.write(kMagic, 4);
    put_u16(out, kFeatureFileVersion);
    put_u16(out, 0);
    put_u32(out, static_cast<uint32_t>(features.rows()));
    put_u32(out, static_cast<uint32_t>(features.cols()));
    for (Eigen::Index r = 0; r < features.rows(); ++r) {
        for (Eigen::Index c = 0; c < features.cols(); ++c) {
            put_u32(out, float_bits(static_cast<float>(features(r, c))));
        }
    }
    require(out.good(), "write_feature_file: write failed for " + path);
}

Eigen::MatrixXd read_feature_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "feature file not found: " + path);
    unsigned char header[16];
    in.read(reinterpret_cast<char*>(header), 16);
    require(in.gcount() == 16, "corrupt feature header (truncated): " + path);
    require(std::memcmp(header, kMagic, 4) == 0, "corrupt feature header (bad magic): " + path);
    const uint16_t version = get_u16(header + 4);
    require(version == kFeatureFileVersion,
            "corrupt feature header (unsupported version " + std::to_string(version) + "): " + path);
    const uint32_t n = get_u32(header + 8);
    const uint32_t dim = get_u32(header + 12);
    require(n >= 1 && dim >= 1, "corrupt feature header (zero shape): " + path);

    Eigen::MatrixXd features(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    std::vector<unsigned char> row(static_cast<size_t>(dim) * 4);
    for (uint32_t r = 0; r < n; ++r) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
        require(in.gcount() == static_cast<std::streamsize>(row.size()),
                "corrupt feature payload (truncated row " + std::to_string(r) + "): " + path);
        for (uint32_t c = 0; c < dim; ++c) {
            features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                static_cast<double>(bits_float(get_u32(row.data() + 4 * c)));
        }
    }
    return features;
}

FeatureManifest read_manifest(const std::string& csv_path) {
    std::ifstream in(csv_path);
    require(in.good(), "manifest not found: " + csv_path);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "manifest empty: " + csv_path);
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    require(line == "bag_id,dataset,label,path",
            "manifest header mismatch in " + csv_path + ": '" + line + "'");

    FeatureManifest rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::array<std::string, 4> fields;
        size_t start = 0;
        for (int f = 0; f < 3; ++f) {
            const size_t comma = line.find(',', start);
            require(comma != std::string::npos,
                    "manifest row " + std::to_string(line_no) + ": expected 4 fields");
            fields[static_cast<size_t>(f)] = line.substr(start, comma - start);
            start = comma + 1;
        }
        fields[3] = line.substr(start);
        ManifestRow row;
        row.bag_id = fields[0];
        try {
            row.dataset_index = std::stoi(fields[1]);
            row.label = std::stoi(fields[2]);
        } catch (const std::exception&) {
            throw Error("manifest row " + std::to_string(line_no) + ": bad integer field");
        }
        row.path = fields[3];
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_manifest(const std::string& csv_path, const FeatureManifest& rows) {
    std::ofstream out(csv_path);
    require(out.good(), "write_manifest: cannot open " + csv_path);
    out << "bag_id,dataset,label,path\n";
    for (const auto& row : rows) {
        out << row.bag_id << ',' << row.dataset_index << ',' << row.label << ',' << row.path
            << '\n';
    }
    require(out.good(), "write_manifest: write failed for " + csv_path);
}

std::vector<InstanceBag> ingest_features(const std::string& manifest_path, int expected_dim) {
    const FeatureManifest manifest = read_manifest(manifest_path);
    const std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();

    std::vector<InstanceBag> bags;
    bags.reserve(manifest.size());
    int dim = expected_dim;
    for (const auto& row : manifest) {
        std::filesystem::path p(row.path);
        if (p.is_relative()) {
            p = base / p;
        }
        InstanceBag bag;
        bag.bag_id = row.bag_id;
        bag.dataset_index = row.dataset_index;
        bag.label = row.label;
        bag.features = read_feature_file(p.string());
        if (dim == 0) {
            dim = bag.feature_dim();
        }
        validate_bag(bag, dim);
        bags.push_back(std::move(bag));
    }
    return bags;
}

}  // namespace qpmil
