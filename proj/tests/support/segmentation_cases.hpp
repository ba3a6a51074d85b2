#pragma once

#include <string>
#include <vector>

namespace radjudge::testing {

struct SegmentationCase {
  std::string input;
  std::vector<std::string> expected;
};

/// Hand-worked segmentation expectations, including digit-adjacent periods,
/// abbreviations, numbered lists, and end-of-string punctuation.
inline const std::vector<SegmentationCase>& segmentation_cases() {
  static const std::vector<SegmentationCase> cases = {
      {"Heart size is normal. Lungs are clear.", {"Heart size is normal", "Lungs are clear."}},
      {"Tip is 2.2 cm above the carina. No effusion.",
       {"Tip is 2.2 cm above the carina", "No effusion."}},
      {"No pneumothorax", {"No pneumothorax"}},
      {"Cardiomegaly.", {"Cardiomegaly."}},
      {"A. B", {"A", "B"}},
      {"A. B. C", {"A", "B", "C"}},
      {"Lungs are clear. ", {"Lungs are clear."}},
      {"Pleural effusion measures 1.5 cm. Stable.",
       {"Pleural effusion measures 1.5 cm", "Stable."}},
      {"Given 0.9% saline. No change.", {"Given 0.9% saline", "No change."}},
      {"Mr. Smith has pneumonia.", {"Mr", "Smith has pneumonia."}},
      {"There is a 3. cm nodule", {"There is a 3. cm nodule"}},
      {"Version 2. 2 follows.", {"Version 2. 2 follows."}},
      {"Stop.Go. Now", {"Stop.Go", "Now"}},
      {"q. 6 hours. Then stop.", {"q", "6 hours", "Then stop."}},
      {"No prior. comparison available", {"No prior", "comparison available"}},
      {".", {"."}},
      {". Lungs clear.", {"Lungs clear."}},
      {"  Heart normal.  Lungs clear.  ", {"Heart normal", "Lungs clear"}},
      {"A.. B", {"A.", "B"}},
      {"Is it clear? Yes. No doubt.", {"Is it clear? Yes", "No doubt."}},
      {"Report 1.2.3 ready. Done.", {"Report 1.2.3 ready", "Done."}},
      {"ET tube 4.5cm above carina. OK.", {"ET tube 4.5cm above carina", "OK."}},
      {"Impression: 1. No pneumonia. 2. Clear lungs.",
       {"Impression: 1. No pneumonia", "2. Clear lungs."}},
      {"multiple   spaces. after. delimiter", {"multiple   spaces", "after", "delimiter"}},
      {"A.\tB", {"A.\tB"}},
  };
  return cases;
}

}  // namespace radjudge::testing
