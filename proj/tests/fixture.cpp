// Writes inputs for the command line smoke test.
//   modmix_fixture dataset DIR        synthetic frames and DIR/manifest.txt
//   modmix_fixture dets GT.json OUT   perfect detections for a COCO document

#include <cstdio>
#include <string>

#include "modmix/coco.hpp"
#include "test_support.hpp"

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "";
  try {
    if (mode == "dataset" && argc == 3) {
      testing::write_synthetic_dataset(argv[2], 5, 20, 14, 42);
      return 0;
    }
    if (mode == "dets" && argc == 4) {
      std::vector<modmix::Detection> dets;
      for (const auto& g : modmix::read_coco(argv[2]).ground_truth()) dets.push_back({g.image_id, g.category_id, g.box, 0.9});
      modmix::write_json_file(argv[3], modmix::detections_to_json(dets));
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
  std::fprintf(stderr, "usage: modmix_fixture dataset DIR | dets GT.json OUT.json\n");
  return 2;
}
