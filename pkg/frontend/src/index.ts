export { Checkpoint, CheckpointEntry } from "./checkpoint";
export {
  ArchiveError,
  CheckpointError,
  ManifestError,
  MissingKeyError,
  ShapeMismatchError,
  UnsupportedDtypeError,
} from "./errors";
export { ExportResult, exportArchive, exportToFile } from "./export";
export { loadCheckpoint } from "./loader";
export { DtypePolicy, ExportManifest, loadManifest, parseManifest, validateMapping } from "./manifest";
export { ArchiveSlot, ConvLayer, FcLayer, NetworkSpec, archiveSlots, loadNetworkSpec, parseNetworkSpec } from "./netspec";
export { parseNpz } from "./npz";
export { parseSafetensors } from "./safetensors";
export { archiveParamCount, readArchiveBytes, writeArchiveBytes } from "./tarc";
export { Dtype, Tensor, elementCount, makeTensor, tensorBytes, upcastToF64 } from "./tensor";
