#ifndef LANTK_DATASET_HPP
#define LANTK_DATASET_HPP

#include "common.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace lantk {

/// Feature/label table. Immutable after construction; labels are class
/// indices in first-seen order of the source file.
struct Dataset {
    Mat features;                          // n x d
    std::vector<int> labels;               // values in [0, class_count)
    int class_count = 0;
    std::vector<std::string> label_names;  // index -> original label text

    Eigen::Index rows() const { return features.rows(); }
    Eigen::Index cols() const { return features.cols(); }
    void validate() const;
};

/// Two-class slice of a Dataset with y in {+1, -1}.
struct BinaryView {
    Mat features;            // rows of the two chosen classes only
    Vec y;                   // +1 for positive_class rows
    int positive_class = 0;
    int negative_class = 1;
    std::vector<std::size_t> source_rows;  // indices into the base dataset

    Eigen::Index rows() const { return features.rows(); }
};

enum class PairMode { train_train, test_train };

/// Index pairs split by label agreement. For train_train both indices refer
/// to the same set; for test_train, first is a test index, second a train index.
struct PairSets {
    std::vector<std::pair<std::size_t, std::size_t>> intra;
    std::vector<std::pair<std::size_t, std::size_t>> inter;
    PairMode mode = PairMode::train_train;
};

Dataset load_csv(const std::string& path, const std::string& label_column);
void write_csv(const std::string& path, const Dataset& ds, const std::string& label_column = "label");

Dataset balanced_subsample(const Dataset& ds, std::size_t per_class, std::uint64_t seed);

BinaryView binary_view(const Dataset& ds, int positive_class, int negative_class);

/// Per-row L2 normalization; opt-in (the analytic kernels depend on norms).
Dataset normalize_rows(const Dataset& ds);

struct PairOptions {
    std::size_t max_pairs_per_bucket = 20000;
    std::uint64_t seed = 0;
};

PairSets enumerate_pairs(const std::vector<int>& labels, const PairOptions& opt = {});
PairSets enumerate_pairs(const BinaryView& view, const PairOptions& opt = {});
PairSets enumerate_pairs_test_train(const std::vector<int>& test_labels,
                                    const std::vector<int>& train_labels,
                                    const PairOptions& opt = {});

}  // namespace lantk

#endif
