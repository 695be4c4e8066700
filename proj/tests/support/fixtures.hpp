#pragma once

#include <string>

#include "crc/common.hpp"

namespace crc::fixture {

inline ReviewInstance make_instance(std::string id, std::string comment = "Please fix this.",
                                    std::string diff = "- old\n+ new",
                                    Language lang = Language::Python) {
  ReviewInstance inst;
  inst.id = std::move(id);
  inst.language = lang;
  inst.diff_hunk = std::move(diff);
  inst.comment = std::move(comment);
  return inst;
}

inline ReviewInstance labeled(ReviewInstance inst, bool r, bool i, bool e) {
  ClarityVerdict v;
  v.attributes = {{Attribute::Relevance, r}, {Attribute::Informativeness, i},
                  {Attribute::Expression, e}};
  inst.labels = v;
  return inst;
}

// Labeled corpus where roughly `positive_pct` percent of each attribute is
// positive. Positive comments carry a reason; negatives are terse.
inline Corpus toy_corpus(std::size_t n, unsigned positive_pct = 70) {
  Corpus c;
  c.source = "toy";
  for (std::size_t i = 0; i < n; ++i) {
    const bool r = (i * 37 + 11) % 100 < positive_pct;
    const bool in = (i * 53 + 7) % 100 < positive_pct;
    const bool e = (i * 71 + 3) % 100 < positive_pct;
    const std::string comment = in ? "Please rename `fooBar` because it shadows the builtin."
                                   : "lgtm";
    c.instances.push_back(labeled(make_instance("toy" + std::to_string(1000 + i), comment,
                                                "- int fooBar = 1;\n+ int foo_bar = 1;"),
                                  r, in, e));
  }
  return c;
}

}  // namespace crc::fixture
