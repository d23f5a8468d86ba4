#pragma once

// Result files: CSV tables (header row, scientific notation with 11 significant
// digits) and legacy VTK snapshots of the deformed state.

#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "fatiguecz/analysis.hpp"
#include "fatiguecz/driver.hpp"
#include "fatiguecz/model.hpp"

namespace fatiguecz {

using CsvValue = std::variant<double, long long, std::string>;

std::string format_csv_double(double v);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<CsvValue>& values);

 private:
  std::ofstream out_;
  size_t columns_;
  std::string path_;
};

void write_steps_csv(const std::string& path, const std::vector<StepRecord>& history);
void write_sn_csv(const std::string& path, const std::vector<SnRow>& rows);
void write_crack_history_csv(const std::string& path, const std::vector<CrackHistoryRecord>& history);
void write_paris_csv(const std::string& path, const ParisData& data);

/// Unstructured grid with bulk elements, crack segments, line interfaces and
/// surface interfaces as cells. Cell data: kind (0 bulk, 1 interface, 2 crack,
/// 3 surface), damage (weight-averaged D) and measure (area or length). Point
/// data: displacement.
void write_vtk(const std::string& path, const Model& model, const std::string& title);

}  // namespace fatiguecz
