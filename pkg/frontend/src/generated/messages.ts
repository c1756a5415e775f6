// Generated by `scenesync gen-schema`. Do not edit by hand.

export const SCHEMA_VERSION = "1";
export const SCHEMA_HASH = "27d8e9be04d79afeb1f08a4c3c8bd256b5b328af8df155c0591958e3668373e6";

export interface SceneUpsertFrame {
  type: "scene_upsert_frame";
  path: string;
  wxyz: [number, number, number, number];
  position: [number, number, number];
  visible: boolean;
  clickable: boolean;
  show_axes: boolean;
  axes_length: number;
  axes_radius: number;
}

export interface SceneUpsertGrid {
  type: "scene_upsert_grid";
  path: string;
  wxyz: [number, number, number, number];
  position: [number, number, number];
  visible: boolean;
  clickable: boolean;
  width: number;
  height: number;
  cell_size: number;
  plane: "xy" | "yz" | "xz";
  color: [number, number, number];
}

export interface SceneUpsertPointCloud {
  type: "scene_upsert_point_cloud";
  path: string;
  wxyz: [number, number, number, number];
  position: [number, number, number];
  visible: boolean;
  clickable: boolean;
  positions: Float32Array;
  colors: Uint8Array;
  point_size: number;
}

export interface SceneUpsertLineSegments {
  type: "scene_upsert_line_segments";
  path: string;
  wxyz: [number, number, number, number];
  position: [number, number, number];
  visible: boolean;
  clickable: boolean;
  positions: Float32Array;
  color: [number, number, number];
  line_width: number;
}

export interface SceneUpsertMesh {
  type: "scene_upsert_mesh";
  path: string;
  wxyz: [number, number, number, number];
  position: [number, number, number];
  visible: boolean;
  clickable: boolean;
  vertices: Float32Array;
  faces: Uint8Array;
  color: [number, number, number];
  wireframe: boolean;
}

export interface SceneUpsertBox {
  type: "scene_upsert_box";
  path: string;
  wxyz: [number, number, number, number];
  position: [number, number, number];
  visible: boolean;
  clickable: boolean;
  dimensions: [number, number, number];
  color: [number, number, number];
}

export interface SceneUpsertIcosphere {
  type: "scene_upsert_icosphere";
  path: string;
  wxyz: [number, number, number, number];
  position: [number, number, number];
  visible: boolean;
  clickable: boolean;
  radius: number;
  subdivisions: number;
  color: [number, number, number];
}

export interface SceneUpsertCameraFrustum {
  type: "scene_upsert_camera_frustum";
  path: string;
  wxyz: [number, number, number, number];
  position: [number, number, number];
  visible: boolean;
  clickable: boolean;
  fov: number;
  aspect: number;
  scale: number;
  color: [number, number, number];
}

export interface SceneUpsertLabel {
  type: "scene_upsert_label";
  path: string;
  wxyz: [number, number, number, number];
  position: [number, number, number];
  visible: boolean;
  clickable: boolean;
  text: string;
}

export interface SceneUpsertImage {
  type: "scene_upsert_image";
  path: string;
  wxyz: [number, number, number, number];
  position: [number, number, number];
  visible: boolean;
  clickable: boolean;
  width: number;
  height: number;
  data: Uint8Array;
  render_width: number;
  render_height: number;
}

export interface SceneUpsertPlaceholder {
  type: "scene_upsert_placeholder";
  path: string;
  wxyz: [number, number, number, number];
  position: [number, number, number];
  visible: boolean;
  clickable: boolean;
}

export interface SceneSetPose {
  type: "scene_set_pose";
  path: string;
  wxyz: [number, number, number, number];
  position: [number, number, number];
}

export interface SceneSetVisible {
  type: "scene_set_visible";
  path: string;
  visible: boolean;
}

export interface SceneSetClickable {
  type: "scene_set_clickable";
  path: string;
  clickable: boolean;
}

export interface SceneSetBoolProp {
  type: "scene_set_bool_prop";
  path: string;
  name: string;
  value: boolean;
}

export interface SceneSetIntProp {
  type: "scene_set_int_prop";
  path: string;
  name: string;
  value: number;
}

export interface SceneSetFloatProp {
  type: "scene_set_float_prop";
  path: string;
  name: string;
  value: number;
}

export interface SceneSetStringProp {
  type: "scene_set_string_prop";
  path: string;
  name: string;
  value: string;
}

export interface SceneSetColorProp {
  type: "scene_set_color_prop";
  path: string;
  name: string;
  value: [number, number, number];
}

export interface SceneSetVec3Prop {
  type: "scene_set_vec3_prop";
  path: string;
  name: string;
  value: [number, number, number];
}

export interface SceneSetBytesProp {
  type: "scene_set_bytes_prop";
  path: string;
  name: string;
  value: Uint8Array;
}

export interface SceneRemove {
  type: "scene_remove";
  path: string;
}

export interface GuiAddButton {
  type: "gui_add_button";
  uid: number;
  container_uid: number;
  order: number;
  label: string;
  color?: [number, number, number] | null;
  disabled: boolean;
  visible: boolean;
  value: number;
}

export interface GuiAddCheckbox {
  type: "gui_add_checkbox";
  uid: number;
  container_uid: number;
  order: number;
  label: string;
  disabled: boolean;
  visible: boolean;
  value: boolean;
}

export interface GuiAddSlider {
  type: "gui_add_slider";
  uid: number;
  container_uid: number;
  order: number;
  label: string;
  min: number;
  max: number;
  step: number;
  disabled: boolean;
  visible: boolean;
  value: number;
}

export interface GuiAddNumber {
  type: "gui_add_number";
  uid: number;
  container_uid: number;
  order: number;
  label: string;
  min?: number | null;
  max?: number | null;
  step: number;
  disabled: boolean;
  visible: boolean;
  value: number;
}

export interface GuiAddText {
  type: "gui_add_text";
  uid: number;
  container_uid: number;
  order: number;
  label: string;
  disabled: boolean;
  visible: boolean;
  value: string;
}

export interface GuiAddDropdown {
  type: "gui_add_dropdown";
  uid: number;
  container_uid: number;
  order: number;
  label: string;
  options: string[];
  disabled: boolean;
  visible: boolean;
  value: string;
}

export interface GuiAddRgb {
  type: "gui_add_rgb";
  uid: number;
  container_uid: number;
  order: number;
  label: string;
  disabled: boolean;
  visible: boolean;
  value: [number, number, number];
}

export interface GuiAddVector3 {
  type: "gui_add_vector3";
  uid: number;
  container_uid: number;
  order: number;
  label: string;
  step: number;
  disabled: boolean;
  visible: boolean;
  value: [number, number, number];
}

export interface GuiAddFolder {
  type: "gui_add_folder";
  uid: number;
  container_uid: number;
  order: number;
  label: string;
  expanded: boolean;
  visible: boolean;
}

export interface GuiAddTabGroup {
  type: "gui_add_tab_group";
  uid: number;
  container_uid: number;
  order: number;
  visible: boolean;
}

export interface GuiAddTab {
  type: "gui_add_tab";
  uid: number;
  container_uid: number;
  order: number;
  label: string;
}

export interface GuiAddMarkdown {
  type: "gui_add_markdown";
  uid: number;
  container_uid: number;
  order: number;
  content: string;
  visible: boolean;
}

export interface GuiSetBoolProp {
  type: "gui_set_bool_prop";
  uid: number;
  name: string;
  value: boolean;
}

export interface GuiSetFloatProp {
  type: "gui_set_float_prop";
  uid: number;
  name: string;
  value?: number | null;
}

export interface GuiSetStringProp {
  type: "gui_set_string_prop";
  uid: number;
  name: string;
  value: string;
}

export interface GuiSetStringListProp {
  type: "gui_set_string_list_prop";
  uid: number;
  name: string;
  value: string[];
}

export interface GuiSetColorProp {
  type: "gui_set_color_prop";
  uid: number;
  name: string;
  value?: [number, number, number] | null;
}

export interface GuiSetBoolValue {
  type: "gui_set_bool_value";
  uid: number;
  value: boolean;
}

export interface GuiSetIntValue {
  type: "gui_set_int_value";
  uid: number;
  value: number;
}

export interface GuiSetFloatValue {
  type: "gui_set_float_value";
  uid: number;
  value: number;
}

export interface GuiSetStringValue {
  type: "gui_set_string_value";
  uid: number;
  value: string;
}

export interface GuiSetColorValue {
  type: "gui_set_color_value";
  uid: number;
  value: [number, number, number];
}

export interface GuiSetVector3Value {
  type: "gui_set_vector3_value";
  uid: number;
  value: [number, number, number];
}

export interface GuiRemove {
  type: "gui_remove";
  uid: number;
  subtree_uids: number[];
}

export interface CameraSet {
  type: "camera_set";
  wxyz: [number, number, number, number];
  position: [number, number, number];
  fov: number;
  aspect: number;
  look_at: [number, number, number];
}

export interface CameraReport {
  type: "camera_report";
  wxyz: [number, number, number, number];
  position: [number, number, number];
  fov: number;
  aspect: number;
  look_at: [number, number, number];
}

export interface ClientHello {
  type: "client_hello";
  schema_hash: string;
}

export interface HandshakeAccept {
  type: "handshake_accept";
  client_id: number;
}

export interface HandshakeReject {
  type: "handshake_reject";
  reason: string;
  server_schema_hash: string;
  client_schema_hash: string;
}

export interface Ack {
  type: "ack";
  seq: number;
}

export interface GuiClientBool {
  type: "gui_client_bool";
  uid: number;
  value: boolean;
}

export interface GuiClientFloat {
  type: "gui_client_float";
  uid: number;
  value: number;
}

export interface GuiClientString {
  type: "gui_client_string";
  uid: number;
  value: string;
}

export interface GuiClientColor {
  type: "gui_client_color";
  uid: number;
  value: [number, number, number];
}

export interface GuiClientVector3 {
  type: "gui_client_vector3";
  uid: number;
  value: [number, number, number];
}

export interface GuiClientClick {
  type: "gui_client_click";
  uid: number;
}

export interface SceneClick {
  type: "scene_click";
  path: string;
  ray_origin: [number, number, number];
  ray_direction: [number, number, number];
  screen_pos: [number, number];
}

export type AnyMessage =
  | SceneUpsertFrame
  | SceneUpsertGrid
  | SceneUpsertPointCloud
  | SceneUpsertLineSegments
  | SceneUpsertMesh
  | SceneUpsertBox
  | SceneUpsertIcosphere
  | SceneUpsertCameraFrustum
  | SceneUpsertLabel
  | SceneUpsertImage
  | SceneUpsertPlaceholder
  | SceneSetPose
  | SceneSetVisible
  | SceneSetClickable
  | SceneSetBoolProp
  | SceneSetIntProp
  | SceneSetFloatProp
  | SceneSetStringProp
  | SceneSetColorProp
  | SceneSetVec3Prop
  | SceneSetBytesProp
  | SceneRemove
  | GuiAddButton
  | GuiAddCheckbox
  | GuiAddSlider
  | GuiAddNumber
  | GuiAddText
  | GuiAddDropdown
  | GuiAddRgb
  | GuiAddVector3
  | GuiAddFolder
  | GuiAddTabGroup
  | GuiAddTab
  | GuiAddMarkdown
  | GuiSetBoolProp
  | GuiSetFloatProp
  | GuiSetStringProp
  | GuiSetStringListProp
  | GuiSetColorProp
  | GuiSetBoolValue
  | GuiSetIntValue
  | GuiSetFloatValue
  | GuiSetStringValue
  | GuiSetColorValue
  | GuiSetVector3Value
  | GuiRemove
  | CameraSet
  | CameraReport
  | ClientHello
  | HandshakeAccept
  | HandshakeReject
  | Ack
  | GuiClientBool
  | GuiClientFloat
  | GuiClientString
  | GuiClientColor
  | GuiClientVector3
  | GuiClientClick
  | SceneClick;

export const MESSAGE_TYPES: readonly string[] = [
  "scene_upsert_frame",
  "scene_upsert_grid",
  "scene_upsert_point_cloud",
  "scene_upsert_line_segments",
  "scene_upsert_mesh",
  "scene_upsert_box",
  "scene_upsert_icosphere",
  "scene_upsert_camera_frustum",
  "scene_upsert_label",
  "scene_upsert_image",
  "scene_upsert_placeholder",
  "scene_set_pose",
  "scene_set_visible",
  "scene_set_clickable",
  "scene_set_bool_prop",
  "scene_set_int_prop",
  "scene_set_float_prop",
  "scene_set_string_prop",
  "scene_set_color_prop",
  "scene_set_vec3_prop",
  "scene_set_bytes_prop",
  "scene_remove",
  "gui_add_button",
  "gui_add_checkbox",
  "gui_add_slider",
  "gui_add_number",
  "gui_add_text",
  "gui_add_dropdown",
  "gui_add_rgb",
  "gui_add_vector3",
  "gui_add_folder",
  "gui_add_tab_group",
  "gui_add_tab",
  "gui_add_markdown",
  "gui_set_bool_prop",
  "gui_set_float_prop",
  "gui_set_string_prop",
  "gui_set_string_list_prop",
  "gui_set_color_prop",
  "gui_set_bool_value",
  "gui_set_int_value",
  "gui_set_float_value",
  "gui_set_string_value",
  "gui_set_color_value",
  "gui_set_vector3_value",
  "gui_remove",
  "camera_set",
  "camera_report",
  "client_hello",
  "handshake_accept",
  "handshake_reject",
  "ack",
  "gui_client_bool",
  "gui_client_float",
  "gui_client_string",
  "gui_client_color",
  "gui_client_vector3",
  "gui_client_click",
  "scene_click",
];

// Fields that decode from raw little-endian bytes to Float32Array.
export const FLOAT32_ARRAY_FIELDS: Readonly<Record<string, readonly string[]>> = {
  scene_upsert_point_cloud: ["positions"],
  scene_upsert_line_segments: ["positions"],
  scene_upsert_mesh: ["vertices"],
};
