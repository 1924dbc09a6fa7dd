import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}

/** The <tr>...</tr> chunk whose cells mention the needle. */
export function rowFor(html: string, needle: string): string {
  const row = html
    .split("<tr")
    .map((chunk) => "<tr" + chunk)
    .find((chunk) => chunk.includes(needle));
  if (!row) throw new Error(`no table row for ${needle}`);
  return row.slice(0, row.indexOf("</tr>"));
}

type Handler = (url: string, init?: RequestInit) => unknown;

/** Tiny fake fetch: route prefix -> handler returning a JSON body. */
export function fakeFetch(routes: Record<string, Handler>) {
  const calls: string[] = [];
  const fetchFn = async (url: string, init?: RequestInit) => {
    calls.push(`${init?.method ?? "GET"} ${url}`);
    for (const [prefix, handler] of Object.entries(routes)) {
      const [method, path] = prefix.split(" ", 2);
      if ((init?.method ?? "GET") === method && url.startsWith(path)) {
        const body = handler(url, init);
        return jsonResponse(body);
      }
    }
    throw new Error(`unrouted request: ${url}`);
  };
  return { fetchFn, calls };
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}
