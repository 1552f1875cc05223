#include "lvnf/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "lvnf/dataset.hpp"
#include "lvnf/image_io.hpp"
#include "lvnf/metrics.hpp"
#include "lvnf/recon.hpp"
#include "lvnf/rendering.hpp"
#include "lvnf/spectral.hpp"
#include "lvnf/synth.hpp"
#include "lvnf/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace lvnf {

namespace {

struct AppConfig {
  TrainConfig train;
  ExtractOptions extract;
  CullOptions cull;
  double merge_voxel = 0.0;
  double eval_cap = 1.0;
  std::vector<CropBox> crop_boxes;
  SpectralOptions spectral;
};

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

AppConfig load_config(const std::string& path) {
  AppConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream is(path);
  if (!is) throw DataError("cannot open config: " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw DataError("malformed config json " + path + ": " + e.what());
  }
  if (j.contains("field")) {
    const json& f = j["field"];
    maybe(f, "levels", cfg.train.field.grid.levels);
    maybe(f, "base_res", cfg.train.field.grid.base_res);
    maybe(f, "max_res", cfg.train.field.grid.max_res);
    maybe(f, "table_size", cfg.train.field.grid.table_size);
    maybe(f, "feat", cfg.train.field.grid.feat);
    maybe(f, "geo_dim", cfg.train.field.geo_dim);
    maybe(f, "density_hidden", cfg.train.field.density_hidden);
    maybe(f, "color_hidden", cfg.train.field.color_hidden);
    maybe(f, "appearance_dim", cfg.train.field.appearance_dim);
    maybe(f, "dir_frequencies", cfg.train.field.dir_frequencies);
    maybe(f, "dir_identity", cfg.train.field.dir_identity);
    bool l2 = cfg.train.field.contraction == ContractionType::L2;
    maybe(f, "l2_contraction", l2);
    cfg.train.field.contraction = l2 ? ContractionType::L2 : ContractionType::InfNorm;
  }
  if (j.contains("train")) {
    const json& t = j["train"];
    maybe(t, "iterations", cfg.train.iterations);
    maybe(t, "rays_per_iteration", cfg.train.rays_per_iteration);
    maybe(t, "lr_init", cfg.train.lr_init);
    maybe(t, "lr_final", cfg.train.lr_final);
    maybe(t, "sigma_hat", cfg.train.sigma_hat);
    maybe(t, "lambda_depth", cfg.train.loss_weights.lambda_depth);
    maybe(t, "lambda_normal", cfg.train.loss_weights.lambda_normal);
    maybe(t, "lambda_sky", cfg.train.loss_weights.lambda_sky);
    maybe(t, "n_coarse", cfg.train.n_coarse);
    maybe(t, "n_fine", cfg.train.n_fine);
    maybe(t, "near", cfg.train.near);
    maybe(t, "far", cfg.train.far);
    maybe(t, "min_half_extent", cfg.train.min_half_extent);
    maybe(t, "log_interval", cfg.train.log_interval);
    maybe(t, "checkpoint_interval", cfg.train.checkpoint_interval);
  }
  if (j.contains("recon")) {
    const json& r = j["recon"];
    maybe(r, "target_count", cfg.extract.target_count);
    maybe(r, "opacity_gate", cfg.extract.opacity_gate);
    maybe(r, "attempts_factor", cfg.extract.attempts_factor);
    maybe(r, "min_density", cfg.cull.min_density);
    maybe(r, "use_density_gate", cfg.cull.use_density_gate);
    maybe(r, "use_neighbor_gate", cfg.cull.use_neighbor_gate);
    maybe(r, "radius", cfg.cull.radius);
    maybe(r, "min_neighbors", cfg.cull.min_neighbors);
    maybe(r, "voxel_size", cfg.merge_voxel);
  }
  if (j.contains("eval")) {
    const json& e = j["eval"];
    maybe(e, "cap", cfg.eval_cap);
    if (e.contains("crop_boxes")) {
      for (const auto& b : e["crop_boxes"]) {
        CropBox box;
        for (int k = 0; k < 3; ++k) {
          box.min[k] = b.at(0).at(k).get<double>();
          box.max[k] = b.at(1).at(k).get<double>();
        }
        cfg.crop_boxes.push_back(box);
      }
    }
  }
  if (j.contains("spectral")) {
    const json& s = j["spectral"];
    maybe(s, "bandwidth", cfg.spectral.bandwidth);
    maybe(s, "kmeans_restarts", cfg.spectral.kmeans_restarts);
  }
  return cfg;
}

json geom_stats_json(const GeomStats& s) {
  return {{"mean", s.mean},       {"median", s.median},      {"inlier_0.1", s.inlier_01},
          {"inlier_0.5", s.inlier_05}, {"inlier_1.0", s.inlier_10}, {"count", s.count}};
}

void write_render_outputs(const RenderedImages& imgs, const std::string& dir, int index) {
  char name[64];
  std::snprintf(name, sizeof(name), "rgb_%04d.png", index);
  write_png_rgb8((fs::path(dir) / name).string(), quantize_u8(imgs.rgb));
  std::snprintf(name, sizeof(name), "depth_%04d.png", index);
  write_png_gray16((fs::path(dir) / name).string(), depth_to_mm(imgs.depth));
  std::snprintf(name, sizeof(name), "normal_%04d.png", index);
  write_png_rgb8((fs::path(dir) / name).string(), encode_normals(imgs.normal));
}

std::vector<std::string> list_checkpoints(const std::string& dir) {
  std::vector<std::string> out;
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".ckpt") out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  if (out.empty()) throw DataError("no .ckpt files in " + dir);
  return out;
}

int run_parsed(CLI::App& app, AppConfig& cfg, uint64_t seed);

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"lidar-visual neural-field reconstruction"};
  app.require_subcommand(1);

  std::string config_path;
  uint64_t seed = 0;
  app.add_option("--config", config_path, "JSON config file (flags win)");
  app.add_option("--seed", seed, "global RNG seed");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  std::string scene_name, synth_out;
  int synth_res = 0;
  synth->add_option("--scene", scene_name, "scene name")->required();
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--res", synth_res, "override image resolution");

  // partition
  auto* part = app.add_subcommand("partition", "spectral submap partition");
  std::string part_dataset, part_out;
  int part_k = 0;
  bool part_auto = false;
  part->add_option("--dataset", part_dataset)->required();
  part->add_option("--k", part_k, "cluster count");
  part->add_flag("--auto", part_auto, "derive k from the trajectory area");
  part->add_option("--out", part_out, "partition file (default <dataset>/partition.json)");

  // align
  auto* align = app.add_subcommand("align", "Sim(3) trajectory rescaling");
  std::string align_src, align_dst, align_out;
  align->add_option("--src", align_src, "up-to-scale trajectory")->required();
  align->add_option("--dst", align_dst, "metric trajectory")->required();
  align->add_option("--out", align_out, "rescaled output trajectory")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "train a field (or submaps)");
  std::string train_dataset, train_partition, train_out;
  int train_iters = -1, train_rays = -1;
  bool no_depth = false, no_normal = false, no_sky = false, train_verbose = false;
  train_cmd->add_option("--dataset", train_dataset)->required();
  train_cmd->add_option("--partition", train_partition, "partition file for submap training");
  train_cmd->add_option("--out", train_out, "output directory")->required();
  train_cmd->add_option("--iters", train_iters, "override iteration count");
  train_cmd->add_option("--rays", train_rays, "override rays per iteration");
  train_cmd->add_flag("--no-depth-loss", no_depth);
  train_cmd->add_flag("--no-normal-loss", no_normal);
  train_cmd->add_flag("--no-sky-loss", no_sky);
  train_cmd->add_flag("--verbose", train_verbose);

  // render
  auto* render_cmd = app.add_subcommand("render", "render images at given poses");
  std::string render_model, render_poses, render_out;
  render_cmd->add_option("--model", render_model)->required();
  render_cmd->add_option("--poses", render_poses, "trajectory file")->required();
  render_cmd->add_option("--out", render_out)->required();

  // extract
  auto* extract_cmd = app.add_subcommand("extract", "extract a point cloud");
  std::string ex_model, ex_dataset, ex_out;
  int ex_count = -1;
  bool ex_cull = false;
  extract_cmd->add_option("--model", ex_model)->required();
  extract_cmd->add_option("--dataset", ex_dataset)->required();
  extract_cmd->add_option("--count", ex_count, "target point count");
  extract_cmd->add_option("--out", ex_out)->required();
  extract_cmd->add_flag("--cull", ex_cull, "cull low-density points");

  // merge
  auto* merge_cmd = app.add_subcommand("merge", "extract + merge submap clouds");
  std::string mg_models, mg_dataset, mg_out;
  int mg_count = -1;
  bool mg_no_cull = false;
  double mg_voxel = -1.0;
  merge_cmd->add_option("--models", mg_models, "directory of .ckpt files")->required();
  merge_cmd->add_option("--dataset", mg_dataset)->required();
  merge_cmd->add_option("--out", mg_out)->required();
  merge_cmd->add_option("--count", mg_count, "points per submap");
  merge_cmd->add_option("--voxel", mg_voxel, "voxel downsample size");
  merge_cmd->add_flag("--no-cull", mg_no_cull);

  // eval-geom
  auto* eg = app.add_subcommand("eval-geom", "accuracy/completeness vs a reference cloud");
  std::string eg_recon, eg_ref, eg_error_ply;
  double eg_cap = -1.0;
  eg->add_option("--recon", eg_recon)->required();
  eg->add_option("--ref", eg_ref)->required();
  eg->add_option("--cap", eg_cap, "distance cap in metres");
  eg->add_option("--error-ply", eg_error_ply, "write per-point error cloud");

  // eval-view
  auto* ev = app.add_subcommand("eval-view", "PSNR/SSIM on a dataset split");
  std::string ev_model, ev_dataset, ev_split = "test";
  ev->add_option("--model", ev_model)->required();
  ev->add_option("--dataset", ev_dataset)->required();
  ev->add_option("--split", ev_split, "train or test");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    AppConfig cfg = load_config(config_path);
    cfg.train.seed = seed;
    cfg.extract.seed = seed;
    cfg.spectral.seed = seed;

    if (*synth) {
      SceneSpec scene = make_scene(scene_name);
      scene.seed = seed;
      if (synth_res > 0) {
        double f = double(synth_res) / scene.sensor.camera.width;
        scene.sensor.camera.fx *= f;
        scene.sensor.camera.fy *= f;
        scene.sensor.camera.width = scene.sensor.camera.height = synth_res;
        scene.sensor.camera.cx = scene.sensor.camera.cy = (synth_res - 1) / 2.0;
      }
      generate_dataset(scene, synth_out);
      json out{{"scene", scene.name},
               {"frames", scene.script.waypoints.size()},
               {"out", synth_out}};
      std::cout << out.dump() << "\n";
      return 0;
    }

    if (*part) {
      Dataset ds = load_dataset(part_dataset);
      std::vector<Vec3> positions;
      std::vector<int> ids;
      for (const auto& f : ds.frames) {
        positions.push_back(f.pose.t);
        ids.push_back(f.id);
      }
      int k = part_auto || part_k <= 0 ? auto_k(positions) : part_k;
      Partition p = spectral_partition(positions, k, cfg.spectral);
      std::string out_path =
          part_out.empty() ? (fs::path(part_dataset) / "partition.json").string() : part_out;
      write_partition(out_path, p, ids);
      json out{{"k", p.k}, {"frames", positions.size()}, {"out", out_path}};
      std::cout << out.dump() << "\n";
      return 0;
    }

    if (*align) {
      Trajectory src = read_trajectory(align_src);
      Trajectory dst = read_trajectory(align_dst);
      RescaleResult res = rescale_trajectory(src, dst);
      write_trajectory(align_out, res.trajectory);
      json out{{"scale", res.transform.s},
               {"q", {res.transform.q.x(), res.transform.q.y(), res.transform.q.z(),
                      res.transform.q.w()}},
               {"t", {res.transform.t.x(), res.transform.t.y(), res.transform.t.z()}},
               {"associations", res.associations},
               {"out", align_out}};
      std::cout << out.dump() << "\n";
      return 0;
    }

    if (*train_cmd) {
      Dataset ds = load_dataset(train_dataset);
      TrainConfig tc = cfg.train;
      if (train_iters >= 0) tc.iterations = train_iters;
      if (train_rays > 0) tc.rays_per_iteration = train_rays;
      tc.use_depth_loss = !no_depth;
      tc.use_normal_loss = !no_normal;
      tc.use_sky_loss = !no_sky;
      tc.verbose = train_verbose;
      fs::create_directories(train_out);

      json out;
      if (!train_partition.empty()) {
        std::vector<int> ids;
        for (const auto& f : ds.frames) ids.push_back(f.id);
        Partition p = read_partition(train_partition, ids);
        tc.checkpoint_path = train_out;
        tc.log_path = (fs::path(train_out) / "train_log.jsonl").string();
        auto results = train_submaps(ds, p, tc);
        out["submaps"] = json::array();
        for (const auto& r : results) {
          json sj{{"cluster", r.cluster}};
          if (!r.result.log.empty()) sj["final_total"] = r.result.log.back().loss.total;
          out["submaps"].push_back(sj);
        }
      } else {
        tc.checkpoint_path = (fs::path(train_out) / "model.ckpt").string();
        tc.log_path = (fs::path(train_out) / "train_log.jsonl").string();
        TrainResult r = train(ds, tc);
        if (!r.log.empty()) {
          out["final_total"] = r.log.back().loss.total;
          out["final_rgb"] = r.log.back().loss.rgb;
        }
        out["checkpoint"] = tc.checkpoint_path;
      }
      std::cout << out.dump() << "\n";
      return 0;
    }

    if (*render_cmd) {
      RadianceField field = RadianceField::load(render_model);
      Trajectory traj = read_trajectory(render_poses);
      fs::create_directories(render_out);
      RenderOptions ropt;
      ropt.n_coarse = cfg.train.n_coarse;
      ropt.n_fine = cfg.train.n_fine;
      ropt.near = field.render_near;
      ropt.far = field.render_far;
      ropt.jitter = false;
      for (size_t i = 0; i < traj.poses.size(); ++i) {
        RenderedImages imgs = render_image(field, field.render_camera, traj.poses[i], ropt);
        write_render_outputs(imgs, render_out, int(i));
      }
      json out{{"rendered", traj.poses.size()}, {"out", render_out}};
      std::cout << out.dump() << "\n";
      return 0;
    }

    if (*extract_cmd) {
      RadianceField field = RadianceField::load(ex_model);
      Dataset ds = load_dataset(ex_dataset);
      ExtractOptions eo = cfg.extract;
      if (ex_count > 0) eo.target_count = ex_count;
      eo.near = field.render_near;
      eo.far = field.render_far;
      eo.world_frame = false;
      PointCloud cloud = extract_points(field, ds, ds.train_indices, eo);
      if (ex_cull) cloud = cull_low_density(cloud, &field, cfg.cull);
      Submap sm{std::move(cloud), field.world_from_local(), nullptr};
      MergeOptions mo;
      mo.cull = false;
      PointCloud world = merge_submaps({sm}, mo);
      write_ply(ex_out, world);
      json out{{"points", world.size()}, {"out", ex_out}};
      std::cout << out.dump() << "\n";
      return 0;
    }

    if (*merge_cmd) {
      Dataset ds = load_dataset(mg_dataset);
      std::vector<std::string> ckpts = list_checkpoints(mg_models);
      std::vector<RadianceField> fields;
      fields.reserve(ckpts.size());
      for (const auto& c : ckpts) fields.push_back(RadianceField::load(c));
      std::vector<Submap> submaps;
      ExtractOptions eo = cfg.extract;
      if (mg_count > 0) eo.target_count = mg_count;
      eo.world_frame = false;
      for (auto& f : fields) {
        eo.near = f.render_near;
        eo.far = f.render_far;
        PointCloud cloud = extract_points(f, ds, ds.train_indices, eo);
        submaps.push_back({std::move(cloud), f.world_from_local(), &f});
      }
      MergeOptions mo;
      mo.cull = !mg_no_cull;
      mo.cull_options = cfg.cull;
      mo.voxel_size = mg_voxel >= 0.0 ? mg_voxel : cfg.merge_voxel;
      PointCloud merged = merge_submaps(submaps, mo);
      write_ply(mg_out, merged);
      json out{{"submaps", submaps.size()}, {"points", merged.size()}, {"out", mg_out}};
      std::cout << out.dump() << "\n";
      return 0;
    }

    if (*eg) {
      PointCloud recon = read_ply(eg_recon);
      PointCloud ref = read_ply(eg_ref);
      if (!cfg.crop_boxes.empty()) {
        recon = crop_to_boxes(recon, cfg.crop_boxes);
        ref = crop_to_boxes(ref, cfg.crop_boxes);
      }
      double cap = eg_cap > 0.0 ? eg_cap : cfg.eval_cap;
      GeomReport rep = evaluate_geometry(recon, ref, cap);
      if (!eg_error_ply.empty()) write_ply(eg_error_ply, error_cloud(recon, ref, cap));
      json out{{"accuracy", geom_stats_json(rep.accuracy)},
               {"completeness", geom_stats_json(rep.completeness)},
               {"cap", rep.cap}};
      std::cout << out.dump() << "\n";
      return 0;
    }

    if (*ev) {
      RadianceField field = RadianceField::load(ev_model);
      Dataset ds = load_dataset(ev_dataset);
      const std::vector<int>& idx = ev_split == "train" ? ds.train_indices : ds.test_indices;
      if (idx.empty()) throw DataError("split '" + ev_split + "' has no frames");
      RenderOptions ropt;
      ropt.n_coarse = cfg.train.n_coarse;
      ropt.n_fine = cfg.train.n_fine;
      ropt.near = field.render_near;
      ropt.far = field.render_far;
      ropt.jitter = false;
      json frames = json::array();
      double psnr_sum = 0.0, ssim_sum = 0.0;
      double mpsnr_sum = 0.0, mssim_sum = 0.0;
      int masked_count = 0;
      for (int i : idx) {
        RenderedImages imgs =
            render_image(field, ds.camera_of(i), ds.frames[i].pose, ropt);
        double p = psnr(imgs.rgb, ds.images[i]);
        double s = ssim(imgs.rgb, ds.images[i]);
        json fj{{"id", ds.frames[i].id}, {"psnr", p}, {"ssim", s}};
        if (ds.has_sky(i)) {
          ImageU8 keep(ds.sky_masks[i].width, ds.sky_masks[i].height, 1);
          for (size_t k = 0; k < keep.data.size(); ++k)
            keep.data[k] = ds.sky_masks[i].data[k] ? 0 : 255;
          MaskedMetrics mm = masked_metrics(imgs.rgb, ds.images[i], keep);
          fj["psnr_sky_masked"] = mm.psnr;
          fj["ssim_sky_masked"] = mm.ssim;
          mpsnr_sum += mm.psnr;
          mssim_sum += mm.ssim;
          ++masked_count;
        }
        frames.push_back(fj);
        psnr_sum += p;
        ssim_sum += s;
      }
      json out{{"split", ev_split},
               {"frames", frames},
               {"psnr", psnr_sum / idx.size()},
               {"ssim", ssim_sum / idx.size()}};
      if (masked_count > 0) {
        out["psnr_sky_masked"] = mpsnr_sum / masked_count;
        out["ssim_sky_masked"] = mssim_sum / masked_count;
      }
      std::cout << out.dump() << "\n";
      return 0;
    }
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace lvnf
