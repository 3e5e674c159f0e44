#include "dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace lantk {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

}  // namespace

void Dataset::validate() const {
    if (rows() < 1 || cols() < 1) throw ValidationError("dataset needs n >= 1 and d >= 1");
    if (static_cast<Eigen::Index>(labels.size()) != rows())
        throw ValidationError("label count does not match row count");
    if (class_count < 1) throw ValidationError("class_count must be >= 1");
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] < 0 || labels[i] >= class_count)
            throw ValidationError("label out of range at row " + std::to_string(i));
}

Dataset load_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw ValidationError("missing file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty file: " + path);
    auto header = split_csv_line(line);
    for (auto& h : header) h = trim(h);

    std::ptrdiff_t label_idx = -1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == label_column) label_idx = static_cast<std::ptrdiff_t>(i);
    if (label_idx < 0)
        throw ValidationError("label column '" + label_column + "' not found in " + path);

    std::vector<std::vector<double>> rows;
    std::vector<std::string> raw_labels;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ValidationError("row " + std::to_string(lineno) + ": expected " +
                                  std::to_string(header.size()) + " cells, got " +
                                  std::to_string(cells.size()));
        std::vector<double> feats;
        feats.reserve(cells.size() - 1);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (static_cast<std::ptrdiff_t>(c) == label_idx) {
                raw_labels.push_back(trim(cells[c]));
                continue;
            }
            const std::string cell = trim(cells[c]);
            std::size_t pos = 0;
            double v = 0.0;
            bool ok = true;
            try {
                v = std::stod(cell, &pos);
            } catch (...) {
                ok = false;
            }
            if (!ok || pos != cell.size() || !std::isfinite(v))
                throw ValidationError("non-numeric feature at row " + std::to_string(lineno) +
                                      ", column '" + header[c] + "'");
            feats.push_back(v);
        }
        rows.push_back(std::move(feats));
    }
    if (rows.empty()) throw ValidationError("no data rows in " + path);
    if (rows[0].empty()) throw ValidationError("no feature columns in " + path);

    Dataset ds;
    ds.features.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];

    // label text -> index, first-seen order
    std::map<std::string, int> seen;
    for (const auto& s : raw_labels) {
        if (seen.find(s) == seen.end()) {
            int idx = static_cast<int>(ds.label_names.size());
            seen[s] = idx;
            ds.label_names.push_back(s);
        }
        ds.labels.push_back(seen[s]);
    }
    ds.class_count = static_cast<int>(ds.label_names.size());
    ds.validate();
    return ds;
}

void write_csv(const std::string& path, const Dataset& ds, const std::string& label_column) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    for (Eigen::Index j = 0; j < ds.cols(); ++j) out << "f" << j << ",";
    out << label_column << "\n";
    out.precision(17);
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
        for (Eigen::Index j = 0; j < ds.cols(); ++j) out << ds.features(i, j) << ",";
        const int lab = ds.labels[static_cast<std::size_t>(i)];
        if (lab < static_cast<int>(ds.label_names.size()))
            out << ds.label_names[static_cast<std::size_t>(lab)];
        else
            out << lab;
        out << "\n";
    }
}

Dataset balanced_subsample(const Dataset& ds, std::size_t per_class, std::uint64_t seed) {
    ds.validate();
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.class_count));
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
        by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);

    std::vector<std::size_t> chosen;
    for (int c = 0; c < ds.class_count; ++c) {
        auto& idx = by_class[static_cast<std::size_t>(c)];
        if (idx.size() < per_class)
            throw ValidationError("class " + std::to_string(c) + " has only " +
                                  std::to_string(idx.size()) + " rows, need " +
                                  std::to_string(per_class));
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(c));
        rng.shuffle(idx);
        chosen.insert(chosen.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(per_class));
    }
    std::sort(chosen.begin(), chosen.end());  // keep source row order

    Dataset out;
    out.class_count = ds.class_count;
    out.label_names = ds.label_names;
    out.features.resize(static_cast<Eigen::Index>(chosen.size()), ds.cols());
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) =
            ds.features.row(static_cast<Eigen::Index>(chosen[i]));
        out.labels.push_back(ds.labels[chosen[i]]);
    }
    return out;
}

BinaryView binary_view(const Dataset& ds, int positive_class, int negative_class) {
    ds.validate();
    if (positive_class == negative_class) throw ValidationError("classes must differ");
    if (positive_class < 0 || positive_class >= ds.class_count ||
        negative_class < 0 || negative_class >= ds.class_count)
        throw ValidationError("class index out of range");

    BinaryView v;
    v.positive_class = positive_class;
    v.negative_class = negative_class;
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
        if (ds.labels[i] == positive_class || ds.labels[i] == negative_class)
            v.source_rows.push_back(i);
    if (v.source_rows.empty()) throw ValidationError("no rows in the chosen classes");
    v.features.resize(static_cast<Eigen::Index>(v.source_rows.size()), ds.cols());
    v.y.resize(static_cast<Eigen::Index>(v.source_rows.size()));
    for (std::size_t i = 0; i < v.source_rows.size(); ++i) {
        v.features.row(static_cast<Eigen::Index>(i)) =
            ds.features.row(static_cast<Eigen::Index>(v.source_rows[i]));
        v.y[static_cast<Eigen::Index>(i)] = ds.labels[v.source_rows[i]] == positive_class ? 1.0 : -1.0;
    }
    return v;
}

Dataset normalize_rows(const Dataset& ds) {
    Dataset out = ds;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        double n = out.features.row(i).norm();
        if (n <= 0.0) throw ValidationError("zero row at index " + std::to_string(i));
        out.features.row(i) /= n;
    }
    return out;
}

namespace {

void cap_bucket(std::vector<std::pair<std::size_t, std::size_t>>& bucket,
                std::size_t cap, Rng& rng) {
    if (bucket.size() <= cap) return;
    rng.shuffle(bucket);
    bucket.resize(cap);
    std::sort(bucket.begin(), bucket.end());
}

}  // namespace

PairSets enumerate_pairs(const std::vector<int>& labels, const PairOptions& opt) {
    if (labels.size() < 2) throw ValidationError("need >= 2 examples to enumerate pairs");
    PairSets ps;
    ps.mode = PairMode::train_train;
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t j = i + 1; j < labels.size(); ++j)
            (labels[i] == labels[j] ? ps.intra : ps.inter).emplace_back(i, j);
    if (ps.intra.empty())
        throw ValidationError("no intra-class pairs: every class has a single example");
    Rng r1 = Rng::substream(opt.seed, 1), r2 = Rng::substream(opt.seed, 2);
    cap_bucket(ps.intra, opt.max_pairs_per_bucket, r1);
    cap_bucket(ps.inter, opt.max_pairs_per_bucket, r2);
    return ps;
}

PairSets enumerate_pairs(const BinaryView& view, const PairOptions& opt) {
    std::vector<int> labels(static_cast<std::size_t>(view.rows()));
    for (Eigen::Index i = 0; i < view.rows(); ++i)
        labels[static_cast<std::size_t>(i)] = view.y[i] > 0 ? 1 : 0;
    return enumerate_pairs(labels, opt);
}

PairSets enumerate_pairs_test_train(const std::vector<int>& test_labels,
                                    const std::vector<int>& train_labels,
                                    const PairOptions& opt) {
    if (test_labels.empty() || train_labels.empty())
        throw ValidationError("test-train mode needs both sets nonempty");
    PairSets ps;
    ps.mode = PairMode::test_train;
    for (std::size_t i = 0; i < test_labels.size(); ++i)
        for (std::size_t j = 0; j < train_labels.size(); ++j)
            (test_labels[i] == train_labels[j] ? ps.intra : ps.inter).emplace_back(i, j);
    if (ps.intra.empty()) throw ValidationError("no intra-class test-train pairs");
    Rng r1 = Rng::substream(opt.seed, 3), r2 = Rng::substream(opt.seed, 4);
    cap_bucket(ps.intra, opt.max_pairs_per_bucket, r1);
    cap_bucket(ps.inter, opt.max_pairs_per_bucket, r2);
    return ps;
}

}  // namespace lantk
