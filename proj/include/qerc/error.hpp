// Copyright 2026 The QERC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace qerc {

/// Base class for every error raised by the library. The CLI maps the
/// category onto its exit code.
class Error : public std::runtime_error {
   public:
    enum class Category { usage = 1, data = 2, numerical = 3 };

    Error(Category category, const std::string &what) : std::runtime_error(what), category_(category) {
    }

    Category category() const noexcept {
        return category_;
    }

   private:
    Category category_;
};

/// Malformed input, bad configuration, missing or inconsistent files.
class DataError : public Error {
   public:
    explicit DataError(const std::string &what) : Error(Category::data, what) {
    }
};

/// Invalid arguments to a library call (violated preconditions).
class InvalidArgument : public Error {
   public:
    explicit InvalidArgument(const std::string &what) : Error(Category::usage, what) {
    }
};

/// Singularities, divergence, degenerate states.
class NumericalError : public Error {
   public:
    explicit NumericalError(const std::string &what) : Error(Category::numerical, what) {
    }
};

}  // namespace qerc
