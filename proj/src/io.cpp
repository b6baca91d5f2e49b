// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#include "geochan/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace geochan {

std::string format_double(double value) {
    if (std::isnan(value))
        return "nan";
    if (std::isinf(value))
        return value > 0 ? "inf" : "-inf";

    char buf[32];
    const std::to_chars_result res = std::to_chars(buf, buf + sizeof(buf), value);
    if (res.ec != std::errc())
        throw std::runtime_error("format_double: conversion failed");
    return {buf, res.ptr};
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary); // binary: identical bytes on any host
    if (!out)
        throw std::runtime_error("write_csv: cannot open " + path);

    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << '\n';
    for (const std::vector<std::string>& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("write_csv: row width differs from header in " + path);
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << row[i];
        out << '\n';
    }
    if (!out)
        throw std::runtime_error("write_csv: write failed for " + path);
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return static_cast<int>(i);
    throw std::invalid_argument("csv: no column named " + name);
}

static std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ','))
        cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
        cells.emplace_back();
    return cells;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("read_csv: cannot open " + path);

    CsvTable table;
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("read_csv: empty file " + path);
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    table.header = split_line(line);

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<std::string> cells = split_line(line);
        if (cells.size() != table.header.size())
            throw std::runtime_error("read_csv: ragged row in " + path);
        table.rows.push_back(std::move(cells));
    }
    return table;
}

} // namespace geochan
