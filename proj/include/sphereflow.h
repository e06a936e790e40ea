#ifndef SPHEREFLOW_H
#define SPHEREFLOW_H

#include <stddef.h>

#if defined(_WIN32)
#if defined(SPHEREFLOW_BUILDING_LIBRARY)
#define SPHEREFLOW_API __declspec(dllexport)
#else
#define SPHEREFLOW_API __declspec(dllimport)
#endif
#else
#define SPHEREFLOW_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status. On failure the message and the
   pipeline stage are kept per thread until the next failing call. */
typedef enum sf_status {
  SF_OK = 0,
  SF_ERROR_INVALID_ARGUMENT = 1,
  SF_ERROR_TOPOLOGY = 2,
  SF_ERROR_SOLVER = 3,
  SF_ERROR_IO = 4,
  SF_ERROR_GEOMETRY = 5,
  SF_ERROR_INTERNAL = 6
} sf_status;

typedef enum sf_csv_table {
  SF_CSV_AREA = 0,  /* vertex,epsilon */
  SF_CSV_ANGLE = 1, /* halfedge,face,corner,eta */
  SF_CSV_FACE = 2   /* face,sigma_max,sigma_min,angle,area */
} sf_csv_table;

typedef struct sf_mesh sf_mesh;
typedef struct sf_embedding sf_embedding;
typedef struct sf_report sf_report;
typedef struct sf_segmentation sf_segmentation;
typedef struct sf_weld sf_weld;

typedef struct sf_options {
  double yamabe_epsilon;     /* 1e-8 */
  int yamabe_max_iterations; /* 500 */
  double omt_tolerance;      /* 1e-6 */
  int omt_max_iterations;    /* 100 */
  double clip_radius;        /* 1e3 */
  int top_landmark;          /* -1: vertex with the largest z */
  int front_landmark;        /* -1: vertex with the largest x */
  /* When set, solver traces go to "<trace_prefix>yamabe_side0.csv",
     "<trace_prefix>yamabe_side1.csv" and "<trace_prefix>omt.csv". */
  const char* trace_prefix;
} sf_options;

SPHEREFLOW_API const char* sf_version(void);
SPHEREFLOW_API const char* sf_status_name(sf_status status);
SPHEREFLOW_API const char* sf_last_error_message(void);
SPHEREFLOW_API const char* sf_last_error_stage(void);

/* Worker threads for the parallel stages; 0 restores the default
   (SPHEREFLOW_THREADS, else the hardware count). Results do not depend on it. */
SPHEREFLOW_API sf_status sf_set_thread_count(int threads);
SPHEREFLOW_API int sf_thread_count(void);

SPHEREFLOW_API void sf_options_init(sf_options* options);

/* Meshes. Faces are counter-clockwise vertex triples, 0-based. */
SPHEREFLOW_API sf_status sf_mesh_load(const char* path, sf_mesh** out);
SPHEREFLOW_API sf_status sf_mesh_create(size_t num_vertices, const double* xyz, size_t num_faces,
                                        const int* faces, sf_mesh** out);
SPHEREFLOW_API void sf_mesh_free(sf_mesh* mesh);
SPHEREFLOW_API size_t sf_mesh_vertex_count(const sf_mesh* mesh);
SPHEREFLOW_API size_t sf_mesh_face_count(const sf_mesh* mesh);
SPHEREFLOW_API int sf_mesh_euler_characteristic(const sf_mesh* mesh);
SPHEREFLOW_API sf_status sf_mesh_copy_positions(const sf_mesh* mesh, double* xyz);
SPHEREFLOW_API sf_status sf_mesh_copy_faces(const sf_mesh* mesh, int* faces);
SPHEREFLOW_API sf_status sf_mesh_save(const sf_mesh* mesh, const char* path);

/* Spherical maps. An embedding holds one unit vector per mesh vertex. */
SPHEREFLOW_API sf_status sf_conformal_map(const sf_mesh* mesh, const sf_options* options, sf_embedding** out);
/* t = 0 returns the conformal map, t = 1 the area-preserving map. */
SPHEREFLOW_API sf_status sf_balanced_map(const sf_mesh* mesh, const sf_embedding* conformal, double t,
                                         const sf_options* options, sf_embedding** out);
SPHEREFLOW_API void sf_embedding_free(sf_embedding* embedding);
SPHEREFLOW_API size_t sf_embedding_vertex_count(const sf_embedding* embedding);
SPHEREFLOW_API sf_status sf_embedding_copy_positions(const sf_embedding* embedding, double* xyz);
SPHEREFLOW_API int sf_embedding_flipped_faces(const sf_embedding* embedding, const sf_mesh* mesh);
/* Writes the embedding with the faces of `mesh`. */
SPHEREFLOW_API sf_status sf_embedding_save(const sf_embedding* embedding, const sf_mesh* mesh, const char* path);

/* Distortion of `image` (same connectivity) against `source`. */
SPHEREFLOW_API sf_status sf_distortion(const sf_mesh* source, const sf_mesh* image, int normalize_area,
                                       sf_report** out);
SPHEREFLOW_API sf_status sf_distortion_embedding(const sf_mesh* source, const sf_embedding* image,
                                                 int normalize_area, sf_report** out);
SPHEREFLOW_API void sf_report_free(sf_report* report);
SPHEREFLOW_API double sf_report_angle_stat(const sf_report* report);
SPHEREFLOW_API double sf_report_area_stat(const sf_report* report);
SPHEREFLOW_API int sf_report_flipped_faces(const sf_report* report);
/* Labels stored in the JSON form; t may be NaN for "not a balanced map". */
SPHEREFLOW_API sf_status sf_report_set_label(sf_report* report, const char* model, double t);
/* Opt-in timings; reports without them are byte-identical across runs. */
SPHEREFLOW_API sf_status sf_report_set_runtime(sf_report* report, double seconds);
SPHEREFLOW_API sf_status sf_report_add_stage_time(sf_report* report, const char* stage, double seconds);
/* Copies the JSON text (NUL-terminated) into buffer if it fits; *length
   receives the text length without the terminator. */
SPHEREFLOW_API sf_status sf_report_json(const sf_report* report, char* buffer, size_t capacity, size_t* length);
SPHEREFLOW_API sf_status sf_report_write_json(const sf_report* report, const char* path);
SPHEREFLOW_API sf_status sf_report_write_csv(const sf_report* report, const char* path, sf_csv_table table);

/* Segmentation by the zero level set of the first eigenfunction. */
SPHEREFLOW_API sf_status sf_segment(const sf_mesh* mesh, sf_segmentation** out);
SPHEREFLOW_API void sf_segmentation_free(sf_segmentation* segmentation);
SPHEREFLOW_API sf_status sf_segmentation_disk(const sf_segmentation* segmentation, int side, sf_mesh** out);
SPHEREFLOW_API double sf_segmentation_area_ratio(const sf_segmentation* segmentation);
SPHEREFLOW_API double sf_segmentation_eigenvalue(const sf_segmentation* segmentation);
SPHEREFLOW_API double sf_segmentation_loop_length(const sf_segmentation* segmentation);
SPHEREFLOW_API size_t sf_segmentation_warning_count(const sf_segmentation* segmentation);
SPHEREFLOW_API const char* sf_segmentation_warning(const sf_segmentation* segmentation, size_t index);
SPHEREFLOW_API sf_status sf_segmentation_write_loop(const sf_segmentation* segmentation, const char* path);
/* CSV "vertex,value" of the eigenfunction on the input vertices. */
SPHEREFLOW_API sf_status sf_segmentation_write_eigenfunction(const sf_segmentation* segmentation, const char* path);

/* Riemann-maps two disks and glues them along the boundary vertices they
   share by position. */
SPHEREFLOW_API sf_status sf_weld_disks(const sf_mesh* first, const sf_mesh* second, const sf_options* options,
                                       sf_weld** out);
SPHEREFLOW_API void sf_weld_free(sf_weld* weld);
SPHEREFLOW_API int sf_weld_infinity_vertex(const sf_weld* weld);
SPHEREFLOW_API double sf_weld_seam_mismatch(const sf_weld* weld);
SPHEREFLOW_API sf_status sf_weld_mesh(const sf_weld* weld, sf_mesh** out);
/* Planar OBJ with z = 0; the vertex at infinity is written at the origin. */
SPHEREFLOW_API sf_status sf_weld_write_plane(const sf_weld* weld, const char* path);
/* Mass-centered stereographic lift as OBJ. */
SPHEREFLOW_API sf_status sf_weld_write_sphere(const sf_weld* weld, const char* path);
/* JSON naming the vertex at infinity. */
SPHEREFLOW_API sf_status sf_weld_write_sidecar(const sf_weld* weld, const char* path);

#ifdef __cplusplus
}
#endif

#endif
