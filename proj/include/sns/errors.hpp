// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The SNS-RSMA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace sns {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SNS_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                    \
   public:                                                       \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

SNS_DEFINE_ERROR(RankDeficient);
SNS_DEFINE_ERROR(DimensionError);
SNS_DEFINE_ERROR(NumericalFailure);
SNS_DEFINE_ERROR(Singular);
SNS_DEFINE_ERROR(Overloaded);
SNS_DEFINE_ERROR(WeightError);
SNS_DEFINE_ERROR(TooManyUsers);
SNS_DEFINE_ERROR(OrderMismatch);
SNS_DEFINE_ERROR(ValidationError);
SNS_DEFINE_ERROR(ModelMismatch);

#undef SNS_DEFINE_ERROR

}  // namespace sns
