#pragma once

#include <stdexcept>
#include <string>

namespace confalyzer {

// Base for every domain error. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class CatalogError : public Error {
 public:
  using Error::Error;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

class StoreError : public Error {
 public:
  using Error::Error;
};

// Another writer holds the log's lock file.
class StoreLockConflict : public StoreError {
 public:
  using StoreError::StoreError;
};

}  // namespace confalyzer
