#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace auctionshape::io {

//! Shortest decimal string that reads back to the same double.
//! Non-finite values print as nan, inf, -inf.
std::string format_double(double x);

//! Writes to a temporary file in the same directory, then renames it over
//! `path`. Nothing is left behind on failure. Throws std::runtime_error.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

//! Quotes a CSV field if it contains a comma, quote or newline.
std::string csv_field(const std::string& s);

//! One CSV row of already formatted fields.
std::string csv_row(const std::vector<std::string>& fields);

//! Splits one CSV line, honoring double quotes.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace auctionshape::io
