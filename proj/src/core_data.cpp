#include "qpmil/core_data.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace qpmil {

void validate_bag(const InstanceBag& bag, int expected_dim) {
    require(bag.instance_count() >= 1, "bag '" + bag.bag_id + "': empty feature matrix");
    require(bag.dataset_index >= 1, "bag '" + bag.bag_id + "': dataset index must be >= 1");
    require(bag.features.allFinite(), "bag '" + bag.bag_id + "': non-finite feature value");
    if (expected_dim > 0) {
        require(bag.feature_dim() == expected_dim,
                "bag '" + bag.bag_id + "': feature dim " + std::to_string(bag.feature_dim()) +
                    " does not match expected " + std::to_string(expected_dim));
    }
}

std::vector<int> forward_order(int num_datasets) {
    std::vector<int> order(static_cast<size_t>(num_datasets));
    for (int t = 0; t < num_datasets; ++t) {
        order[static_cast<size_t>(t)] = t + 1;
    }
    return order;
}

std::vector<int> reverse_order(int num_datasets) {
    std::vector<int> order = forward_order(num_datasets);
    std::reverse(order.begin(), order.end());
    return order;
}

ClassRegistry::ClassRegistry(std::vector<std::string> templates)
    : templates_(std::move(templates)) {
    require(!templates_.empty(), "registry: template list must be non-empty");
}

std::vector<int> ClassRegistry::register_dataset(
    const std::vector<std::vector<std::string>>& names_per_class) {
    require(!names_per_class.empty(), "register_dataset: no classes given");
    for (const auto& names : names_per_class) {
        require(!names.empty(), "register_dataset: class with empty name list");
        for (const auto& name : names) {
            require(used_names_.count(name) == 0,
                    "register_dataset: duplicate class name '" + name + "'");
        }
    }

    const int dataset_index = ++dataset_count_;
    per_dataset_.emplace_back();
    std::vector<int> new_ids;
    for (const auto& names : names_per_class) {
        const int id = static_cast<int>(classes_.size());
        classes_.push_back(Entry{names, dataset_index});
        for (const auto& name : names) {
            used_names_.insert(name);
        }
        per_dataset_.back().push_back(id);
        new_ids.push_back(id);
    }
    return new_ids;
}

namespace {

std::string substitute(const std::string& tmpl, const std::string& placeholder,
                       const std::string& name) {
    std::string out = tmpl;
    size_t pos = 0;
    while ((pos = out.find(placeholder, pos)) != std::string::npos) {
        out.replace(pos, placeholder.size(), name);
        pos += name.size();
    }
    return out;
}

}  // namespace

std::vector<std::string> ClassRegistry::expand_descriptions(int class_id) const {
    const auto& entry = classes_.at(static_cast<size_t>(class_id));
    std::vector<std::string> out;
    out.reserve(entry.names.size() * templates_.size());
    for (const auto& name : entry.names) {
        for (const auto& tmpl : templates_) {
            out.push_back(substitute(tmpl, kPlaceholder, name));
        }
    }
    return out;
}

int ClassRegistry::dataset_of(int class_id) const {
    return classes_.at(static_cast<size_t>(class_id)).dataset_index;
}

const std::vector<std::string>& ClassRegistry::names(int class_id) const {
    return classes_.at(static_cast<size_t>(class_id)).names;
}

const std::vector<int>& ClassRegistry::classes_of_dataset(int dataset_index) const {
    require(dataset_index >= 1 && dataset_index <= dataset_count_,
            "classes_of_dataset: unknown dataset index " + std::to_string(dataset_index));
    return per_dataset_.at(static_cast<size_t>(dataset_index - 1));
}

namespace {

std::string strip(const std::string& line) {
    size_t a = line.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) {
        return "";
    }
    size_t b = line.find_last_not_of(" \t\r\n");
    return line.substr(a, b - a + 1);
}

}  // namespace

ClassEnsembleData parse_class_ensemble(const std::string& text) {
    ClassEnsembleData data;
    enum class Section { kNone, kTemplates, kClassNames };
    Section section = Section::kNone;

    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        const std::string line = strip(raw);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (line == "[templates]") {
            section = Section::kTemplates;
            continue;
        }
        if (line.rfind("[dataset ", 0) == 0 && line.back() == ']') {
            data.datasets.push_back({strip(line.substr(9, line.size() - 10)), {}});
            section = Section::kNone;
            continue;
        }
        if (line.rfind("[class ", 0) == 0 && line.back() == ']') {
            require(!data.datasets.empty(), "class ensemble: [class] before any [dataset]");
            data.datasets.back().classes.push_back({strip(line.substr(7, line.size() - 8)), {}});
            section = Section::kClassNames;
            continue;
        }
        switch (section) {
            case Section::kTemplates:
                data.templates.push_back(line);
                break;
            case Section::kClassNames:
                data.datasets.back().classes.back().names.push_back(line);
                break;
            case Section::kNone:
                throw Error("class ensemble: stray line '" + line + "'");
        }
    }
    require(!data.templates.empty(), "class ensemble: no templates");
    return data;
}

ClassEnsembleData load_class_ensemble_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "class ensemble file not found: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_class_ensemble(buf.str());
}

namespace {

constexpr const char* kBuiltinEnsemble = R"ENS(
[templates]
ClassName
a photomicrograph showing ClassName
a photomicrograph of ClassName
an image of ClassName
an image showing ClassName
an example of ClassName
ClassName is shown
this is ClassName
there is ClassName
a histopathological image showing ClassName
a histopathological image of ClassName
a histopathological photograph of ClassName
a histopathological photograph showing ClassName
shows ClassName
presence of ClassName
ClassName is present
an H&E stained image of ClassName
an H&E stained image showing ClassName
an H&E image showing ClassName
an H&E image of ClassName
ClassName, H&E stain
ClassName, H&E

[dataset NSCLC]
[class LUAD]
lung adenocarcinoma
adenocarcinoma of the lung
LUAD
[class LUSC]
lung squamous cell carcinoma
squamous cell carcinoma of the lung
LUSC

[dataset BRCA]
[class IDC]
invasive ductal carcinoma
breast invasive ductal carcinoma
invasive ductal carcinoma of the breast
invasive carcinoma of the breast, ductal pattern
breast IDC
[class ILC]
invasive lobular carcinoma
breast invasive lobular carcinoma
invasive lobular carcinoma of the breast
invasive carcinoma of the breast, lobular pattern
breast ILC

[dataset RCC]
[class CCRCC]
clear cell renal cell carcinoma
renal cell carcinoma, clear cell type
renal cell carcinoma of the clear cell type
clear cell RCC
[class PRCC]
papillary renal cell carcinoma
renal cell carcinoma, papillary type
renal cell carcinoma of the papillary type
papillary RCC

[dataset ESCA]
[class ESAD]
esophageal adenocarcinoma
adenocarcinoma of the esophageal
ESAD
[class ESCC]
esophageal squamous cell carcinoma
squamous cell carcinoma of the esophageal
ESCC
)ENS";

}  // namespace

const ClassEnsembleData& builtin_class_ensemble() {
    static const ClassEnsembleData data = parse_class_ensemble(kBuiltinEnsemble);
    return data;
}

}  // namespace qpmil
