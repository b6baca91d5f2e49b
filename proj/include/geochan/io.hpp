// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef GEOCHAN_IO_HPP
#define GEOCHAN_IO_HPP

#include <string>
#include <vector>

namespace geochan {

// Shortest decimal string that parses back to exactly the same double
// ("1.5", "0.1", "nan", "inf"). All numeric file output goes through this
// so that repeated runs produce byte-identical files.
std::string format_double(double value);

// One CSV cell per string; no quoting (writers never emit commas in cells).
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Minimal reader for the files this project writes: splits on commas,
// verifies a rectangular layout, returns header plus rows.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const; // throws if absent
};
CsvTable read_csv(const std::string& path);

} // namespace geochan

#endif
