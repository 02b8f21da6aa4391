#pragma once

// Text serialisation of a generated dataset.
//
// Format, version 1 (whitespace separated, one record per line):
//
//   RICLDATA 1
//   seed <u64>
//   kind <name> <mean> <std>
//   shape <n> <d>
//   x_true <d values>
//   section <prefix|validation|test> <count>
//   A <n*d values, row-major>
//   b <n values>
//   ... (A/b pair repeated count times, then the next section)
//
// Numbers use the shortest round-trip form, so a read after a write restores
// every value bit for bit.

#include <iosfwd>
#include <string>

#include "ricl/datagen.hpp"

namespace ricl {

void write_dataset(std::ostream& out, const Dataset& ds);
/// Throws kSchemaError on any malformed or truncated input.
Dataset read_dataset(std::istream& in);

void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

/// Long-format CSV for inspection: `section,example,field,row,col,value`,
/// where field is A, b or x_true.
void write_dataset_csv(std::ostream& out, const Dataset& ds);

}  // namespace ricl
