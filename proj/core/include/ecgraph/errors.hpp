#pragma once

#include <stdexcept>
#include <string>

namespace ecgraph {

enum class Errc {
  FileNotFound,
  DecodeError,
  RegionOutOfBounds,
  UnknownLead,
  BadLayout,
  EmptyStartColumn,
  EmptyBand,
  SeedNotInk,
  EndUnreachable,
  EmptyIntersection,
  NoSearchingPoints,
  EmptyTrace,
  BandOverflow,
  ShapeMismatch,
  OddModelDim,
  ConfigShapeMismatch,
  UnknownOp,
  EmptyDataset,
  LabelOutOfRange,
  LengthMismatch,
  ClassOutOfRange,
  EmptyMatrix,
  IoError,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::DecodeError: return "DecodeError";
    case Errc::RegionOutOfBounds: return "RegionOutOfBounds";
    case Errc::UnknownLead: return "UnknownLead";
    case Errc::BadLayout: return "BadLayout";
    case Errc::EmptyStartColumn: return "EmptyStartColumn";
    case Errc::EmptyBand: return "EmptyBand";
    case Errc::SeedNotInk: return "SeedNotInk";
    case Errc::EndUnreachable: return "EndUnreachable";
    case Errc::EmptyIntersection: return "EmptyIntersection";
    case Errc::NoSearchingPoints: return "NoSearchingPoints";
    case Errc::EmptyTrace: return "EmptyTrace";
    case Errc::BandOverflow: return "BandOverflow";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::OddModelDim: return "OddModelDim";
    case Errc::ConfigShapeMismatch: return "ConfigShapeMismatch";
    case Errc::UnknownOp: return "UnknownOp";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::LabelOutOfRange: return "LabelOutOfRange";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ClassOutOfRange: return "ClassOutOfRange";
    case Errc::EmptyMatrix: return "EmptyMatrix";
    case Errc::IoError: return "IoError";
  }
  return "Error";
}

// Single exception type for the whole library; tests match on code().
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

} // namespace ecgraph
