// Small file helpers shared by the checkpoint writer and the command line.
#ifndef JEESDP_IO_HPP_
#define JEESDP_IO_HPP_

#include <stdexcept>
#include <string>

namespace jeesdp {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace jeesdp

#endif  // JEESDP_IO_HPP_
