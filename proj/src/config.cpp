#include "graspkit/config.hpp"

#include <json.hpp>

#include <fstream>

namespace graspkit {

using nlohmann::ordered_json;

void PipelineConfig::validate() const {
  if (!(voxel > 0.0)) throw std::invalid_argument("config: voxel must be positive");
  if (normals_k < 3) throw std::invalid_argument("config: normals_k below 3");
  if (mask_erode_kernel < 1 || mask_erode_kernel % 2 == 0)
    throw std::invalid_argument("config: mask erode kernel must be odd");
  if (mask_max_retries < 0)
    throw std::invalid_argument("config: negative mask retry bound");
  if (candidates == 0)
    throw std::invalid_argument("config: candidate budget must be positive");
  if (!(collision_neighborhood > 0.0))
    throw std::invalid_argument("config: collision neighborhood must be positive");
  if (viewpoint_count == 0)
    throw std::invalid_argument("config: need at least one viewpoint");
  if (!(stance_distance_min > 0.0) || stance_distance_max < stance_distance_min)
    throw std::invalid_argument("config: bad stance distance range");
  compensation.validate();
  completer.validate();
  if (patch_size == 0 || patch_refine_budget == 0)
    throw std::invalid_argument("config: patch sizes must be positive");
  gripper.validate();
  weights.validate();
  exec.validate();
  camera.validate();
  noise.validate();
}

namespace {
void expect_keys(const ordered_json& j, const char* where,
                 std::initializer_list<const char*> keys) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known)
      throw std::invalid_argument(std::string("config: unknown key '") + key +
                                  "' in " + where);
  }
}
}  // namespace

std::string config_to_json(const PipelineConfig& c) {
  ordered_json j;
  j["voxel"] = c.voxel;
  j["normals_k"] = c.normals_k;

  j["mask"]["erode_kernel"] = c.mask_erode_kernel;
  j["mask"]["erode_iterations"] = c.mask_erode_iterations;
  j["mask"]["min_pixels"] = c.mask_min_pixels;
  j["mask"]["max_retries"] = c.mask_max_retries;

  j["compensation"]["window"] = c.compensation.window;
  j["compensation"]["min_valid"] = c.compensation.min_valid;
  j["compensation"]["fill_spread_max"] = c.compensation.fill_spread_max;
  j["compensation"]["outlier_dev_max"] = c.compensation.outlier_dev_max;

  j["completer"]["kind"] = to_string(c.completer.kind);
  j["completer"]["input_size"] = c.completer.input_size;
  j["completer"]["output_size"] = c.completer.output_size;
  j["completer"]["oracle_ref"] = c.completer.oracle_ref;

  j["patch"]["size"] = c.patch_size;
  j["patch"]["refine_budget"] = c.patch_refine_budget;

  j["gripper"]["max_aperture"] = c.gripper.max_aperture;
  j["gripper"]["finger_length"] = c.gripper.finger_length;
  j["gripper"]["finger_thickness"] = c.gripper.finger_thickness;
  j["gripper"]["finger_height"] = c.gripper.finger_height;
  j["gripper"]["palm_depth"] = c.gripper.palm_depth;
  j["gripper"]["palm_width"] = c.gripper.palm_width;

  j["weights"]["w_theta"] = c.weights.w_theta;
  j["weights"]["w_phi"] = c.weights.w_phi;
  j["weights"]["w_c"] = c.weights.w_c;
  j["weights"]["r_max"] = c.weights.r_max;
  j["weights"]["penalty_m"] = c.weights.penalty_M;
  j["weights"]["below_threshold"] = c.weights.below_threshold;

  j["exec"]["delta"] = c.exec.delta;
  j["exec"]["insertion_length"] = c.exec.insertion_length;
  j["exec"]["standoff"] = c.exec.standoff;
  j["exec"]["lift_height"] = c.exec.lift_height;
  j["exec"]["sweep_step"] = c.exec.sweep_step;

  j["sampler"]["candidates"] = c.candidates;
  j["sampler"]["yaw_steps"] = c.sampler.yaw_steps;
  j["sampler"]["friction_half_angle_deg"] =
      c.sampler.friction_half_angle / 0.017453292519943295;
  j["sampler"]["min_region_points"] = c.sampler.min_region_points;
  j["sampler"]["seed_budget_factor"] = c.sampler.seed_budget_factor;
  j["sampler"]["neighborhood"] = c.collision_neighborhood;

  j["camera"]["fx"] = c.camera.fx;
  j["camera"]["fy"] = c.camera.fy;
  j["camera"]["cx"] = c.camera.cx;
  j["camera"]["cy"] = c.camera.cy;
  j["camera"]["width"] = c.camera.width;
  j["camera"]["height"] = c.camera.height;

  j["viewpoints"]["count"] = c.viewpoint_count;
  j["viewpoints"]["yaw_span_deg"] = c.viewpoint_yaw_span / 0.017453292519943295;
  j["viewpoints"]["height_stagger"] = c.viewpoint_height_stagger;

  j["noise"]["enabled"] = c.noise_enabled;
  j["noise"]["sigma0"] = c.noise.sigma0;
  j["noise"]["sigma1"] = c.noise.sigma1;
  j["noise"]["dropout_p"] = c.noise.dropout_p;
  j["noise"]["quantization"] = c.noise.quantization;

  j["robot"]["base_height"] = c.base_height;
  j["robot"]["camera_height"] = c.camera_height;
  j["robot"]["camera_forward"] = c.camera_forward;
  j["robot"]["stance_distance_min"] = c.stance_distance_min;
  j["robot"]["stance_distance_max"] = c.stance_distance_max;
  j["robot"]["stance_lateral"] = c.stance_lateral;

  j["seeds"]["noise"] = c.seed_stream_noise;
  j["seeds"]["completion"] = c.seed_stream_completion;
  j["seeds"]["sampler"] = c.seed_stream_sampler;
  j["seeds"]["stance"] = c.seed_stream_stance;

  return j.dump(2) + "\n";
}

PipelineConfig config_from_json(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  PipelineConfig c;

  expect_keys(j, "config",
              {"voxel", "normals_k", "mask", "compensation", "completer",
               "patch", "gripper", "weights", "exec", "sampler", "camera",
               "viewpoints", "noise", "robot", "seeds"});

  if (j.contains("voxel")) c.voxel = j["voxel"];
  if (j.contains("normals_k")) c.normals_k = j["normals_k"];

  if (j.contains("mask")) {
    const auto& m = j["mask"];
    expect_keys(m, "mask", {"erode_kernel", "erode_iterations", "min_pixels",
                            "max_retries"});
    if (m.contains("erode_kernel")) c.mask_erode_kernel = m["erode_kernel"];
    if (m.contains("erode_iterations"))
      c.mask_erode_iterations = m["erode_iterations"];
    if (m.contains("min_pixels")) c.mask_min_pixels = m["min_pixels"];
    if (m.contains("max_retries")) c.mask_max_retries = m["max_retries"];
  }

  if (j.contains("compensation")) {
    const auto& m = j["compensation"];
    expect_keys(m, "compensation",
                {"window", "min_valid", "fill_spread_max", "outlier_dev_max"});
    if (m.contains("window")) c.compensation.window = m["window"];
    if (m.contains("min_valid")) c.compensation.min_valid = m["min_valid"];
    if (m.contains("fill_spread_max"))
      c.compensation.fill_spread_max = m["fill_spread_max"];
    if (m.contains("outlier_dev_max"))
      c.compensation.outlier_dev_max = m["outlier_dev_max"];
  }

  if (j.contains("completer")) {
    const auto& m = j["completer"];
    expect_keys(m, "completer", {"kind", "input_size", "output_size", "oracle_ref"});
    if (m.contains("kind"))
      c.completer.kind = completer_kind_from_string(m["kind"]);
    if (m.contains("input_size")) c.completer.input_size = m["input_size"];
    if (m.contains("output_size")) c.completer.output_size = m["output_size"];
    if (m.contains("oracle_ref")) c.completer.oracle_ref = m["oracle_ref"];
  }

  if (j.contains("patch")) {
    const auto& m = j["patch"];
    expect_keys(m, "patch", {"size", "refine_budget"});
    if (m.contains("size")) c.patch_size = m["size"];
    if (m.contains("refine_budget")) c.patch_refine_budget = m["refine_budget"];
  }

  if (j.contains("gripper")) {
    const auto& m = j["gripper"];
    expect_keys(m, "gripper",
                {"max_aperture", "finger_length", "finger_thickness",
                 "finger_height", "palm_depth", "palm_width"});
    if (m.contains("max_aperture")) c.gripper.max_aperture = m["max_aperture"];
    if (m.contains("finger_length")) c.gripper.finger_length = m["finger_length"];
    if (m.contains("finger_thickness"))
      c.gripper.finger_thickness = m["finger_thickness"];
    if (m.contains("finger_height")) c.gripper.finger_height = m["finger_height"];
    if (m.contains("palm_depth")) c.gripper.palm_depth = m["palm_depth"];
    if (m.contains("palm_width")) c.gripper.palm_width = m["palm_width"];
  }

  if (j.contains("weights")) {
    const auto& m = j["weights"];
    expect_keys(m, "weights", {"w_theta", "w_phi", "w_c", "r_max", "penalty_m",
                               "below_threshold"});
    if (m.contains("w_theta")) c.weights.w_theta = m["w_theta"];
    if (m.contains("w_phi")) c.weights.w_phi = m["w_phi"];
    if (m.contains("w_c")) c.weights.w_c = m["w_c"];
    if (m.contains("r_max")) c.weights.r_max = m["r_max"];
    if (m.contains("penalty_m")) c.weights.penalty_M = m["penalty_m"];
    if (m.contains("below_threshold"))
      c.weights.below_threshold = m["below_threshold"];
  }

  if (j.contains("exec")) {
    const auto& m = j["exec"];
    expect_keys(m, "exec", {"delta", "insertion_length", "standoff",
                            "lift_height", "sweep_step"});
    if (m.contains("delta")) c.exec.delta = m["delta"];
    if (m.contains("insertion_length"))
      c.exec.insertion_length = m["insertion_length"];
    if (m.contains("standoff")) c.exec.standoff = m["standoff"];
    if (m.contains("lift_height")) c.exec.lift_height = m["lift_height"];
    if (m.contains("sweep_step")) c.exec.sweep_step = m["sweep_step"];
  }

  if (j.contains("sampler")) {
    const auto& m = j["sampler"];
    expect_keys(m, "sampler",
                {"candidates", "yaw_steps", "friction_half_angle_deg",
                 "min_region_points", "seed_budget_factor", "neighborhood"});
    if (m.contains("candidates")) c.candidates = m["candidates"];
    if (m.contains("yaw_steps")) c.sampler.yaw_steps = m["yaw_steps"];
    if (m.contains("friction_half_angle_deg"))
      c.sampler.friction_half_angle =
          double(m["friction_half_angle_deg"]) * 0.017453292519943295;
    if (m.contains("min_region_points"))
      c.sampler.min_region_points = m["min_region_points"];
    if (m.contains("seed_budget_factor"))
      c.sampler.seed_budget_factor = m["seed_budget_factor"];
    if (m.contains("neighborhood")) c.collision_neighborhood = m["neighborhood"];
  }

  if (j.contains("camera")) {
    const auto& m = j["camera"];
    expect_keys(m, "camera", {"fx", "fy", "cx", "cy", "width", "height"});
    if (m.contains("fx")) c.camera.fx = m["fx"];
    if (m.contains("fy")) c.camera.fy = m["fy"];
    if (m.contains("cx")) c.camera.cx = m["cx"];
    if (m.contains("cy")) c.camera.cy = m["cy"];
    if (m.contains("width")) c.camera.width = m["width"];
    if (m.contains("height")) c.camera.height = m["height"];
  }

  if (j.contains("viewpoints")) {
    const auto& m = j["viewpoints"];
    expect_keys(m, "viewpoints", {"count", "yaw_span_deg", "height_stagger"});
    if (m.contains("count")) c.viewpoint_count = m["count"];
    if (m.contains("yaw_span_deg"))
      c.viewpoint_yaw_span = double(m["yaw_span_deg"]) * 0.017453292519943295;
    if (m.contains("height_stagger"))
      c.viewpoint_height_stagger = m["height_stagger"];
  }

  if (j.contains("noise")) {
    const auto& m = j["noise"];
    expect_keys(m, "noise",
                {"enabled", "sigma0", "sigma1", "dropout_p", "quantization"});
    if (m.contains("enabled")) c.noise_enabled = m["enabled"];
    if (m.contains("sigma0")) c.noise.sigma0 = m["sigma0"];
    if (m.contains("sigma1")) c.noise.sigma1 = m["sigma1"];
    if (m.contains("dropout_p")) c.noise.dropout_p = m["dropout_p"];
    if (m.contains("quantization")) c.noise.quantization = m["quantization"];
  }

  if (j.contains("robot")) {
    const auto& m = j["robot"];
    expect_keys(m, "robot",
                {"base_height", "camera_height", "camera_forward",
                 "stance_distance_min", "stance_distance_max", "stance_lateral"});
    if (m.contains("base_height")) c.base_height = m["base_height"];
    if (m.contains("camera_height")) c.camera_height = m["camera_height"];
    if (m.contains("camera_forward")) c.camera_forward = m["camera_forward"];
    if (m.contains("stance_distance_min"))
      c.stance_distance_min = m["stance_distance_min"];
    if (m.contains("stance_distance_max"))
      c.stance_distance_max = m["stance_distance_max"];
    if (m.contains("stance_lateral")) c.stance_lateral = m["stance_lateral"];
  }

  if (j.contains("seeds")) {
    const auto& m = j["seeds"];
    expect_keys(m, "seeds", {"noise", "completion", "sampler", "stance"});
    if (m.contains("noise")) c.seed_stream_noise = m["noise"];
    if (m.contains("completion")) c.seed_stream_completion = m["completion"];
    if (m.contains("sampler")) c.seed_stream_sampler = m["sampler"];
    if (m.contains("stance")) c.seed_stream_stance = m["stance"];
  }

  c.validate();
  return c;
}

void save_config(const PipelineConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_config: cannot open " + path);
  out << config_to_json(config);
  if (!out) throw std::runtime_error("save_config: write failed for " + path);
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return config_from_json(text);
}

}  // namespace graspkit
