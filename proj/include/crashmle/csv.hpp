#ifndef CRASHMLE_CSV_HPP
#define CRASHMLE_CSV_HPP

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace crashmle::csv {

using Record = std::vector<std::string>;

// RFC-4180 reader: quoted fields, doubled quotes, embedded separators and
// line breaks, CRLF or LF terminators. A leading UTF-8 BOM is skipped.
std::vector<Record> read_records(std::istream& in);

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape_field(const std::string& field);

void write_record(std::ostream& out, const Record& record);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

}  // namespace crashmle::csv

#endif  // CRASHMLE_CSV_HPP
