// optional runtime dependency, loaded dynamically; typed loosely on purpose
declare module "@xenova/transformers";
