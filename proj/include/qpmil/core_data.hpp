#pragma once

#include <Eigen/Dense>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "qpmil/common.hpp"

namespace qpmil {

// One weakly-labeled sample: instance features plus a bag-level label.
struct InstanceBag {
    std::string bag_id;
    int dataset_index = 0;  // 1-based
    int label = -1;         // global class id
    Eigen::MatrixXd features;  // instance_count x feature_dim, row per instance

    int instance_count() const { return static_cast<int>(features.rows()); }
    int feature_dim() const { return static_cast<int>(features.cols()); }
};

// Throws when the bag violates its invariants. expected_dim == 0 skips the
// dimension cross-check.
void validate_bag(const InstanceBag& bag, int expected_dim = 0);

struct DatasetSplit {
    std::vector<InstanceBag> train;
    std::vector<InstanceBag> test;
};

// Ordered sequence of datasets plus the training-order permutation.
struct IncrementalSequence {
    std::vector<DatasetSplit> datasets;  // canonical order; index 0 is dataset 1
    std::vector<int> order;              // order[p] = canonical dataset index trained at phase p+1

    int size() const { return static_cast<int>(datasets.size()); }
};

std::vector<int> forward_order(int num_datasets);
std::vector<int> reverse_order(int num_datasets);

// Class-name and template registry behind the class ensemble. Class ids are
// contiguous in registration order, global across all datasets.
class ClassRegistry {
public:
    static constexpr const char* kPlaceholder = "ClassName";

    explicit ClassRegistry(std::vector<std::string> templates);

    // Registers one dataset's classes. Each entry is a non-empty list of
    // names for one class; returns the new class ids. Rejects duplicate
    // names across datasets.
    std::vector<int> register_dataset(const std::vector<std::vector<std::string>>& names_per_class);

    // All m = |names| * |templates| descriptions, names-major / templates-minor.
    std::vector<std::string> expand_descriptions(int class_id) const;

    int class_count() const { return static_cast<int>(classes_.size()); }
    int dataset_count() const { return dataset_count_; }
    int dataset_of(int class_id) const;
    const std::vector<std::string>& names(int class_id) const;
    const std::vector<int>& classes_of_dataset(int dataset_index) const;
    const std::vector<std::string>& templates() const { return templates_; }

private:
    struct Entry {
        std::vector<std::string> names;
        int dataset_index = 0;
    };

    std::vector<std::string> templates_;
    std::vector<Entry> classes_;
    std::vector<std::vector<int>> per_dataset_;
    std::set<std::string> used_names_;
    int dataset_count_ = 0;
};

// Parsed form of the shipped class-ensemble data file: shared templates plus
// per-dataset blocks of class-name lists keyed by tumor-type code.
struct ClassEnsembleData {
    struct ClassBlock {
        std::string code;
        std::vector<std::string> names;
    };
    struct DatasetBlock {
        std::string name;
        std::vector<ClassBlock> classes;
    };

    std::vector<std::string> templates;
    std::vector<DatasetBlock> datasets;
};

ClassEnsembleData parse_class_ensemble(const std::string& text);
ClassEnsembleData load_class_ensemble_file(const std::string& path);
// Compiled-in copy of data/class_ensemble.txt.
const ClassEnsembleData& builtin_class_ensemble();

}  // namespace qpmil
