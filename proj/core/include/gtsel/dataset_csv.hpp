#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gtsel/model.hpp"

namespace gtsel {

// Dataset CSV layout: header "pool_id,z,x1,...,xp", one row per individual.
// pool_id is an opaque label; rows sharing a label form a pool and must
// carry the same z. Pools are ordered by first appearance, individuals by
// row order. se/sp are not part of the file and are supplied by the caller.
Dataset read_dataset_csv(std::istream& in, double se, double sp);
Dataset read_dataset_csv_file(const std::string& path, double se, double sp);

// Writes pools labelled g1..gJ in pool order; row order is individual order.
void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv_file(const std::string& path, const Dataset& data);

// Companion truth file "id,y_true" with 1-based ids in row order.
void write_truth_csv(std::ostream& out, const std::vector<int>& y_true);
void write_truth_csv_file(const std::string& path, const std::vector<int>& y_true);

}  // namespace gtsel
