// Stage palette as the /stagekinds endpoint reports it; pinned here so unit
// tests match the service contract (the live suite re-fetches the real one).
import { makePalette } from "../src/draft.js";
import type { StageKindInfo } from "../src/types.js";

export const STAGE_KINDS: StageKindInfo[] = [
  { kind: "TextGen", inputs: [["in", "text"]], output: "text", checkpointable: true },
  { kind: "Chat", inputs: [["in", "text"]], output: "text", checkpointable: true },
  { kind: "TextToImage", inputs: [["in", "text"]], output: "image", checkpointable: true },
  { kind: "ImageToText", inputs: [["in", "image"]], output: "text", checkpointable: true },
  {
    kind: "StyleTransfer",
    inputs: [
      ["content", "image"],
      ["style", "image"],
    ],
    output: "image",
    checkpointable: true,
  },
  { kind: "ImageEdit", inputs: [["in", "image"]], output: "image", checkpointable: true },
  { kind: "Tts", inputs: [["in", "text"]], output: "audio", checkpointable: false },
  { kind: "Asr", inputs: [["in", "audio"]], output: "text", checkpointable: true },
  { kind: "TextToVideo", inputs: [["in", "text"]], output: "video", checkpointable: false },
  { kind: "VideoSummary", inputs: [["in", "video"]], output: "text", checkpointable: true },
  { kind: "Translate", inputs: [["in", "text"]], output: "text", checkpointable: true },
  { kind: "PromptExpand", inputs: [["in", "text"]], output: "text", checkpointable: true },
];

export const PALETTE = makePalette(STAGE_KINDS);
