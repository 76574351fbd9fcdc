// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace vdit {

/// Comma-separated file with a header row; numbers use a fixed format so
/// equal values always print identically.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& file, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  /// Leading text cells followed by numbers.
  void row(const std::vector<std::string>& labels, const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

std::string format_number(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(const std::filesystem::path& file);

void write_json(const std::filesystem::path& file, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& file);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Line chart with axes, min/max tick labels and a legend.
void plot_lines(const std::filesystem::path& file, const std::string& title, const std::string& x_label,
                const std::string& y_label, const std::vector<Series>& series);

/// Cluster labels [T, h, w] as a horizontal strip of color-coded frames.
void save_label_strip(const std::filesystem::path& file, const torch::Tensor& labels, int scale = 16);

}  // namespace vdit
