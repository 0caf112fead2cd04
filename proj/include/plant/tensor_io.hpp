/*
 * Copyright 2026 The PLANT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef PLANT_TENSOR_IO_HPP_
#define PLANT_TENSOR_IO_HPP_

#include <Eigen/Dense>
#include <map>
#include <stdexcept>
#include <string>

namespace plant {

// Raised when an on-disk artifact is malformed or missing required entries.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Versioned binary container shared by every checkpoint in the project:
//   magic "PLNTCKPT" | u32 version | u32 meta_len | meta JSON (UTF-8)
//   | u32 count | count x (u32 name_len | name | u64 rows | u64 cols | f64[] row-major)
// Tensors are keyed by name; vectors are stored as n x 1.
struct TensorFile {
  std::string meta_json;  // free-form manifest (config echo, shapes, hashes)
  std::map<std::string, Eigen::MatrixXd> tensors;

  bool has(const std::string& name) const { return tensors.count(name) != 0; }
  const Eigen::MatrixXd& at(const std::string& name) const;
};

void save_tensor_file(const std::string& path, const TensorFile& tf);
TensorFile load_tensor_file(const std::string& path);

// FNV-1a 64 of a file's bytes, hex-encoded; "missing" if unreadable.
std::string file_hash_hex(const std::string& path);

// Reads an entire file into a string (throws IoError on failure).
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace plant

#endif  // PLANT_TENSOR_IO_HPP_
