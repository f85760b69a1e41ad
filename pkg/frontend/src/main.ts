import { bootstrapFromDocument } from "./app.js";

bootstrapFromDocument();
